# tests/tests_utils/test_config_loader.py

import pytest
import yaml
from unittest.mock import patch, mock_open

from src.utils.config_loader import ConfigLoader, merge, unflatten
from src.utils.exceptions import ConfigError

MOCK_USER_CONFIG = '''
problem:
  kind: oracle_b
estimator:
  kind: squared_loss
  variant: 3
  M: 4
sgd.budget: 1e5
run:
  seed: 42
'''

@pytest.fixture(autouse=True)
def reset_defaults():
    """Reset the ConfigLoader's cached defaults before each test."""
    ConfigLoader._defaults = None

@pytest.fixture
def loaded_defaults():
    """Read the shipped defaults before open() gets patched."""
    return ConfigLoader.defaults()

@pytest.fixture
def mock_user_file(loaded_defaults):
    """Provide a mock user YAML file."""
    with patch('builtins.open', new_callable=mock_open, read_data=MOCK_USER_CONFIG):
        yield

def test_defaults_are_cached():
    """The defaults file is parsed once per process."""
    with patch('src.utils.config_loader.yaml.safe_load', wraps=yaml.safe_load) as spy:
        ConfigLoader.defaults()
        ConfigLoader.defaults()
    assert spy.call_count == 1

def test_defaults_are_copied(loaded_defaults):
    """Callers cannot mutate the cache."""
    loaded_defaults["run"]["seed"] = 999
    assert ConfigLoader.defaults()["run"]["seed"] == 1

def test_load_defaults_only():
    """Without a file or overrides the shipped defaults are returned."""
    config = ConfigLoader.load()
    assert config.problem.kind == "logistic"
    assert config.estimator.kind == "mlmc"
    assert config.estimator.tau == 1.5
    assert config.sgd.budget == 1_000_000.0
    assert config.run.seed == 1 and config.run.replicates == 10
    assert config.diagnostics.fit_range == (1, 8)

def test_load_user_file(mock_user_file):
    """A user file overrides the defaults; dotted keys and exponent literals are accepted."""
    config = ConfigLoader.load("user.yaml")
    assert config.problem.kind == "oracle_b"
    assert (config.estimator.kind, config.estimator.variant, config.estimator.M) == ("squared_loss", 3, 4)
    assert config.sgd.budget == 100_000.0
    assert config.run.seed == 42
    assert config.sgd.gamma0 == 1e-4

def test_overrides_win_and_none_is_ignored(mock_user_file):
    """Command-line overrides beat the file; None means 'not given'."""
    config = ConfigLoader.load("user.yaml", {"run.seed": 7, "run.threads": None, "estimator.M": 6})
    assert config.run.seed == 7
    assert config.run.threads == 1
    assert config.estimator.M == 6

def test_estimator_list_inherits_base():
    """Entries of 'estimators' are merged over the base estimator section."""
    config = ConfigLoader.from_mapping({
        "problem.kind": "oracle_a",
        "estimator.N": 3,
        "estimators": [{"kind": "nested_mc", "M": 8}, {"kind": "mlmc", "tau": 2.0}],
    })
    assert [e.kind for e in config.estimators] == ["nested_mc", "mlmc"]
    assert config.estimators[0].M == 8 and config.estimators[0].N == 3
    assert config.estimators[1].tau == 2.0

@pytest.mark.parametrize("mapping, field", [
    ({"estimator.bogus": 1}, "estimator.bogus"),
    ({"nonsense": 1}, "nonsense"),
    ({"estimator.tau": 1.0}, "estimator.tau"),
    ({"problem.kind": "oracle_b", "estimator.kind": "squared_loss", "estimator.variant": 3, "estimator.M": 1},
     "estimator.M"),
    ({"estimator.kind": "squared_loss"}, "estimator.kind"),
    ({"estimator.kind": "exact"}, "estimator.kind"),
    ({"sgd.budget": 0}, "sgd.budget"),
    ({"sgd.kind": "adam"}, "sgd.kind"),
    ({"diagnostics.variance_reps": 999}, "diagnostics.variance_reps"),
    ({"diagnostics.objective_m": 1}, "diagnostics.objective_m"),
    ({"diagnostics.reps": 1}, "diagnostics.reps"),
    ({"problem.layers": [2, 4, 1]}, "problem.layers"),
    ({"problem.var_e": -1.0}, "problem.var_e"),
    ({"run.seed": -1}, "run.seed"),
    ({"diagnostics.M_values": [1, 0]}, "diagnostics.M_values"),
    ({"estimator.counts": []}, "estimator.counts"),
    ({"estimators": [{"kind": "nested_mc", "M": 0}]}, "estimators[0].M"),
])
def test_invalid_values_name_the_field(mapping, field):
    """Validation errors carry the dotted name of the offending field."""
    with pytest.raises(ConfigError) as error:
        ConfigLoader.from_mapping(mapping)
    assert error.value.field == field

def test_malformed_yaml(loaded_defaults):
    """Parse errors report their position."""
    malformed = '''
    sgd: [gamma0, budget
    run: seed]
    '''
    with patch('builtins.open', new_callable=mock_open, read_data=malformed):
        with pytest.raises(ConfigError, match="line"):
            ConfigLoader.load("broken.yaml")

def test_yaml_must_be_a_mapping(loaded_defaults):
    """A scalar document is not a configuration."""
    with patch('builtins.open', new_callable=mock_open, read_data='just a string'):
        with pytest.raises(ConfigError):
            ConfigLoader.load("scalar.yaml")

def test_empty_file_means_defaults(loaded_defaults):
    """An empty user file changes nothing."""
    with patch('builtins.open', new_callable=mock_open, read_data=''):
        assert ConfigLoader.load("empty.yaml").run.seed == 1

def test_user_file_not_found(loaded_defaults):
    """A missing user file propagates FileNotFoundError."""
    with patch('builtins.open', side_effect=FileNotFoundError):
        with pytest.raises(FileNotFoundError):
            ConfigLoader.load("missing.yaml")

def test_unflatten_and_merge():
    """Dotted keys nest; merge replaces leaves and lists."""
    assert unflatten({"a.b": 1, "a": {"c": 2}}) == {"a": {"b": 1, "c": 2}}
    assert merge({"a": {"b": 1, "l": [1, 2]}}, {"a": {"l": [3]}}) == {"a": {"b": 1, "l": [3]}}
    with pytest.raises(ConfigError):
        unflatten({"a": 1, "a.b": 2})

def test_to_dict_echo():
    """The resolved config serializes with one entry per estimator."""
    data = ConfigLoader.load(overrides={"run.seed": 5}).to_dict()
    assert data["run"]["seed"] == 5
    assert isinstance(data["estimators"], list) and data["estimators"][0]["kind"] == "mlmc"
