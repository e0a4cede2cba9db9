# src/utils/config_loader.py

import copy
import os
from dataclasses import asdict, dataclass
from typing import Any

import yaml

from .exceptions import ConfigError
from .general_utility import partition_counts
from .logger import console_logger, logger

PROBLEM_KINDS = ("logistic", "iv", "oracle_a", "oracle_b", "oracle_affine", "degenerate")
SQUARED_LOSS_KINDS = ("iv", "oracle_b", "degenerate")
ESTIMATOR_KINDS = ("mlmc", "nested_mc", "fixed_mlmc", "squared_loss", "exact")
STEP_KINDS = ("constant", "inverse_t")
TRUTHS = ("sin", "identity", "abs", "step")
MIN_VARIANCE_REPS = 1_000
MAX_SEED = 2 ** 64

@dataclass(frozen=True)
class ProblemSettings:
    kind: str
    d: int
    sigma_xi2: float
    sigma_eta2: float
    truth: str
    var_e: float
    var_gamma: float
    var_delta: float
    layers: tuple[int, ...]
    init_seed: int
    x0_scale: float
    x0: tuple[float, ...] | None

@dataclass(frozen=True)
class EstimatorSettings:
    kind: str
    label: str | None
    N: int
    M: int
    variant: int
    tau: float
    l_hard: int
    counts: tuple[int, ...]

@dataclass(frozen=True)
class SgdSettings:
    kind: str
    gamma0: float
    budget: float
    eval_every: int | None
    snapshot_params: bool

@dataclass(frozen=True)
class DiagnosticsSettings:
    levels: tuple[int, int]
    reps: int
    fit_range: tuple[int, int]
    step: float
    tol: float
    n_points: int
    models: tuple[str, ...]
    M_values: tuple[int, ...]
    variance_reps: int
    objective_n_hat: int
    objective_n: int
    objective_m: int
    grid_points: int
    scatter_rows: int
    params_file: str | None

@dataclass(frozen=True)
class RunSettings:
    seed: int
    replicates: int
    threads: int

@dataclass(frozen=True)
class OutputSettings:
    dir: str

@dataclass(frozen=True)
class RunConfig:
    """
    Fully resolved and validated run configuration.

    Attributes:
        problem (ProblemSettings): Problem selector and its parameters.
        estimators (tuple[EstimatorSettings, ...]): Estimators to run, at least one.
        sgd (SgdSettings): Step schedule and budget.
        diagnostics (DiagnosticsSettings): Parameters of beta, compare-variance, gradcheck and iv-fit.
        run (RunSettings): Master seed, replicate count, thread count.
        output (OutputSettings): Output directory.
    """
    problem: ProblemSettings
    estimators: tuple[EstimatorSettings, ...]
    sgd: SgdSettings
    diagnostics: DiagnosticsSettings
    run: RunSettings
    output: OutputSettings

    @property
    def estimator(self) -> EstimatorSettings:
        return self.estimators[0]

    def to_dict(self) -> dict[str, Any]:
        """Plain-data form for the run_config.json sidecar."""
        data = asdict(self)
        data["estimators"] = [asdict(e) for e in self.estimators]
        return data

def unflatten(mapping: dict[str, Any]) -> dict[str, Any]:
    """
    Expand dotted keys into nested mappings.

    Examples:
        >>> unflatten({"estimator.kind": "mlmc", "sgd": {"gamma0": 0.1}})
        {'estimator': {'kind': 'mlmc'}, 'sgd': {'gamma0': 0.1}}
    """
    result: dict[str, Any] = {}
    for key, value in mapping.items():
        if isinstance(value, dict):
            value = unflatten(value)
        parts = str(key).split(".")
        target = result
        for part in parts[:-1]:
            existing = target.setdefault(part, {})
            if not isinstance(existing, dict):
                raise ConfigError("a value and a section share this name", ".".join(parts[:-1]))
            target = existing
        leaf = parts[-1]
        if isinstance(value, dict) and isinstance(target.get(leaf), dict):
            target[leaf] = merge(target[leaf], value)
        else:
            target[leaf] = value
    return result

def merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    """Recursive merge; values in update win, lists are replaced whole."""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged

def _check_keys(section: dict[str, Any], allowed: dict[str, Any], prefix: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError("unknown key", f"{prefix}.{key}" if prefix else str(key))

def _int(value: Any, field: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"expected an integer, got {value!r}", field)
    if minimum is not None and value < minimum:
        raise ConfigError(f"must be >= {minimum}, got {value}", field)
    return value

def _float(value: Any, field: str, positive: bool = False) -> float:
    # PyYAML reads exponent literals without a sign (1e6) as strings
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", field)
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"expected a number, got {value!r}", field) from None
    if number != number or number in (float("inf"), float("-inf")):
        raise ConfigError(f"must be finite, got {value!r}", field)
    if positive and not number > 0:
        raise ConfigError(f"must be > 0, got {value!r}", field)
    return number

def _choice(value: Any, choices: tuple[str, ...], field: str) -> str:
    if value not in choices:
        raise ConfigError(f"must be one of {', '.join(choices)}, got {value!r}", field)
    return value

def _int_list(value: Any, field: str, minimum: int | None = None, length: int | None = None) -> tuple[int, ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("expected a non-empty list", field)
    if length is not None and len(value) != length:
        raise ConfigError(f"expected {length} entries, got {len(value)}", field)
    return tuple(_int(v, f"{field}[{i}]", minimum) for i, v in enumerate(value))

def _count_list(value: Any, field: str) -> tuple[int, ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError("expected a non-empty list", field)
    valid, invalid = partition_counts(list(value))
    if invalid:
        raise ConfigError(f"entries must be integers >= 1, got {invalid}", field)
    return tuple(valid)

def _problem(raw: dict[str, Any]) -> ProblemSettings:
    kind = _choice(raw["kind"], PROBLEM_KINDS, "problem.kind")
    layers = _int_list(raw["layers"], "problem.layers", minimum=1)
    if len(layers) < 2 or layers[0] != 1 or layers[-1] != 1:
        raise ConfigError(f"must start and end with 1, got {list(layers)}", "problem.layers")
    x0 = raw["x0"]
    if x0 is not None:
        if not isinstance(x0, (list, tuple)) or not x0:
            raise ConfigError("expected a non-empty list or null", "problem.x0")
        x0 = tuple(_float(v, f"problem.x0[{i}]") for i, v in enumerate(x0))
    variances = {}
    for name in ("var_e", "var_gamma", "var_delta"):
        variances[name] = _float(raw[name], f"problem.{name}")
        if variances[name] < 0:
            raise ConfigError("must be >= 0", f"problem.{name}")
    return ProblemSettings(
        kind=kind,
        d=_int(raw["d"], "problem.d", minimum=1),
        sigma_xi2=_float(raw["sigma_xi2"], "problem.sigma_xi2", positive=True),
        sigma_eta2=_float(raw["sigma_eta2"], "problem.sigma_eta2", positive=True),
        truth=_choice(raw["truth"], TRUTHS, "problem.truth"),
        layers=layers,
        init_seed=_int(raw["init_seed"], "problem.init_seed", minimum=0),
        x0_scale=_float(raw["x0_scale"], "problem.x0_scale", positive=True),
        x0=x0,
        **variances,
    )

def _estimator(raw: dict[str, Any], field: str, problem_kind: str) -> EstimatorSettings:
    kind = _choice(raw["kind"], ESTIMATOR_KINDS, f"{field}.kind")
    variant = _int(raw["variant"], f"{field}.variant")
    if kind == "squared_loss":
        if variant not in (1, 2, 3):
            raise ConfigError(f"must be 1, 2 or 3, got {variant}", f"{field}.variant")
        if problem_kind not in SQUARED_LOSS_KINDS:
            raise ConfigError(f"squared_loss estimators need a squared-loss problem, got {problem_kind!r}", f"{field}.kind")
    if kind == "exact" and problem_kind not in ("oracle_a", "oracle_b", "oracle_affine", "degenerate"):
        raise ConfigError(f"the exact gradient needs a finite-support problem, got {problem_kind!r}", f"{field}.kind")
    M = _int(raw["M"], f"{field}.M", minimum=1)
    if kind == "squared_loss" and variant == 3 and M < 2:
        raise ConfigError("estimator 3 needs M >= 2", f"{field}.M")
    tau = _float(raw["tau"], f"{field}.tau")
    if not tau > 1:
        raise ConfigError(f"tau must exceed 1 for finite expected cost, got {tau}", f"{field}.tau")
    label = raw["label"]
    if label is not None and (not isinstance(label, str) or not label or os.sep in label):
        raise ConfigError(f"expected a plain directory name, got {label!r}", f"{field}.label")
    return EstimatorSettings(
        kind=kind, label=label,
        N=_int(raw["N"], f"{field}.N", minimum=1),
        M=M, variant=variant, tau=tau,
        l_hard=_int(raw["l_hard"], f"{field}.l_hard", minimum=0),
        counts=_count_list(raw["counts"], f"{field}.counts"),
    )

def _sgd(raw: dict[str, Any]) -> SgdSettings:
    eval_every = raw["eval_every"]
    if eval_every is not None:
        eval_every = _int(eval_every, "sgd.eval_every", minimum=1)
    return SgdSettings(
        kind=_choice(raw["kind"], STEP_KINDS, "sgd.kind"),
        gamma0=_float(raw["gamma0"], "sgd.gamma0", positive=True),
        budget=_float(raw["budget"], "sgd.budget", positive=True),
        eval_every=eval_every,
        snapshot_params=bool(raw["snapshot_params"]),
    )

def _diagnostics(raw: dict[str, Any]) -> DiagnosticsSettings:
    levels = _int_list(raw["levels"], "diagnostics.levels", minimum=0, length=2)
    if levels[0] > levels[1]:
        raise ConfigError("first level must not exceed the last", "diagnostics.levels")
    fit_range = _int_list(raw["fit_range"], "diagnostics.fit_range", minimum=0, length=2)
    if fit_range[0] >= fit_range[1]:
        raise ConfigError("needs at least two levels", "diagnostics.fit_range")
    models = raw["models"]
    if not isinstance(models, (list, tuple)) or not models:
        raise ConfigError("expected a non-empty list", "diagnostics.models")
    params_file = raw["params_file"]
    if params_file is not None and not isinstance(params_file, str):
        raise ConfigError("expected a path or null", "diagnostics.params_file")
    return DiagnosticsSettings(
        levels=levels,
        reps=_int(raw["reps"], "diagnostics.reps", minimum=2),
        fit_range=fit_range,
        step=_float(raw["step"], "diagnostics.step", positive=True),
        tol=_float(raw["tol"], "diagnostics.tol", positive=True),
        n_points=_int(raw["n_points"], "diagnostics.n_points", minimum=1),
        models=tuple(_choice(m, PROBLEM_KINDS, f"diagnostics.models[{i}]") for i, m in enumerate(models)),
        M_values=_count_list(raw["M_values"], "diagnostics.M_values"),
        variance_reps=_int(raw["variance_reps"], "diagnostics.variance_reps", minimum=MIN_VARIANCE_REPS),
        objective_n_hat=_int(raw["objective_n_hat"], "diagnostics.objective_n_hat", minimum=1),
        objective_n=_int(raw["objective_n"], "diagnostics.objective_n", minimum=1),
        objective_m=_int(raw["objective_m"], "diagnostics.objective_m", minimum=2),
        grid_points=_int(raw["grid_points"], "diagnostics.grid_points", minimum=2),
        scatter_rows=_int(raw["scatter_rows"], "diagnostics.scatter_rows", minimum=1),
        params_file=params_file,
    )

def _run(raw: dict[str, Any]) -> RunSettings:
    seed = _int(raw["seed"], "run.seed", minimum=0)
    if seed >= MAX_SEED:
        raise ConfigError("must fit in 64 bits", "run.seed")
    return RunSettings(
        seed=seed,
        replicates=_int(raw["replicates"], "run.replicates", minimum=1),
        threads=_int(raw["threads"], "run.threads", minimum=1),
    )

def validate(raw: dict[str, Any], defaults: dict[str, Any]) -> RunConfig:
    """
    Check a merged configuration mapping and build the typed RunConfig.

    Args:
        raw (dict[str, Any]): Defaults merged with the user file and overrides.
        defaults (dict[str, Any]): The defaults, which define the allowed keys.

    Returns:
        RunConfig: The validated configuration.

    Raises:
        ConfigError: Naming the first offending field.
    """
    _check_keys(raw, defaults, "")
    for section in ("problem", "estimator", "sgd", "diagnostics", "run", "output"):
        if not isinstance(raw[section], dict):
            raise ConfigError("expected a mapping", section)
        _check_keys(raw[section], defaults[section], section)

    problem = _problem(raw["problem"])
    entries = raw["estimators"]
    if not isinstance(entries, list):
        raise ConfigError("expected a list of mappings", "estimators")
    if entries:
        estimators = []
        for i, entry in enumerate(entries):
            field = f"estimators[{i}]"
            if not isinstance(entry, dict):
                raise ConfigError("expected a mapping", field)
            entry = unflatten(entry)
            _check_keys(entry, defaults["estimator"], field)
            estimators.append(_estimator(merge(raw["estimator"], entry), field, problem.kind))
    else:
        estimators = [_estimator(raw["estimator"], "estimator", problem.kind)]

    out_dir = raw["output"]["dir"]
    if not isinstance(out_dir, str) or not out_dir:
        raise ConfigError("expected a directory path", "output.dir")

    return RunConfig(
        problem=problem,
        estimators=tuple(estimators),
        sgd=_sgd(raw["sgd"]),
        diagnostics=_diagnostics(raw["diagnostics"]),
        run=_run(raw["run"]),
        output=OutputSettings(out_dir),
    )

class ConfigLoader:
    """
    Loads run configurations: shipped defaults, then a user YAML file, then CLI overrides.

    The defaults file is read once per process and cached on the class.

    Attributes:
        BASE_DIR (str): Directory of this module.
        DEFAULTS_FILE (str): Path of experiment_defaults.yaml.
        _defaults (dict[str, Any] | None): Cache of the parsed defaults.
    """

    BASE_DIR = os.path.dirname(os.path.abspath(__file__))
    DEFAULTS_FILE = os.path.join(BASE_DIR, 'experiment_defaults.yaml')
    _defaults: dict[str, Any] | None = None

    @staticmethod
    def _read_yaml(path: str) -> dict[str, Any]:
        try:
            with open(path, 'r', encoding='utf-8') as file:
                data = yaml.safe_load(file)
        except yaml.MarkedYAMLError as e:
            mark = e.problem_mark
            where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
            console_logger.error(f"Error: Failed to parse config file {path} at {where}")
            raise ConfigError(f"YAML parse error at {where}: {e.problem}", path) from e
        except yaml.YAMLError as e:
            raise ConfigError(f"YAML parse error: {e}", path) from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError("The config file must contain a mapping.", path)
        return unflatten(data)

    @classmethod
    def defaults(cls) -> dict[str, Any]:
        """
        The shipped defaults, loaded on first use.

        Raises:
            FileNotFoundError: If experiment_defaults.yaml is missing.
        """
        if cls._defaults is None:
            logger.info("Loading experiment defaults from file...")
            try:
                cls._defaults = cls._read_yaml(cls.DEFAULTS_FILE)
            except FileNotFoundError:
                console_logger.error(f"Error: Defaults file not found: {cls.DEFAULTS_FILE}")
                raise
        return copy.deepcopy(cls._defaults)

    @classmethod
    def load(cls, path: str | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
        """
        Resolve and validate a run configuration.

        Args:
            path (str | None): User YAML file, nested or with dotted keys.
            overrides (dict[str, Any] | None): Dotted-key overrides from the command line.
                None values are ignored.

        Returns:
            RunConfig: The validated configuration.

        Raises:
            ConfigError: On parse errors or invalid values, naming the field.
            FileNotFoundError: If path does not exist.

        Example:
            >>> ConfigLoader.load(overrides={"run.seed": 3}).run.seed
            3
        """
        defaults = cls.defaults()
        merged = defaults
        if path is not None:
            logger.info(f"Loading run config from {path}")
            merged = merge(merged, cls._read_yaml(path))
        if overrides:
            merged = merge(merged, unflatten({k: v for k, v in overrides.items() if v is not None}))
        config = validate(merged, defaults)
        logger.info(f"Resolved config: problem={config.problem.kind}, "
                    f"estimators={[e.kind for e in config.estimators]}, seed={config.run.seed}")
        return config

    @classmethod
    def from_mapping(cls, mapping: dict[str, Any]) -> RunConfig:
        """Validate an in-memory mapping (nested or dotted) against the defaults."""
        defaults = cls.defaults()
        return validate(merge(defaults, unflatten(mapping)), defaults)
