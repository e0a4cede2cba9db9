# main.py

import logging

import click

from src.experiments.commands import cmd_beta, cmd_compare_variance, cmd_gradcheck, cmd_iv_fit, cmd_optimize
from src.utils.config_loader import ConfigLoader
from src.utils.exceptions import CsoError, MissingArtifactError
from src.utils.logger import console_logger, get_module_logger, logger, set_console_level

# Setup module-specific logger
module_logger = get_module_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

def _exit_code(error: Exception) -> int:
    if isinstance(error, (MissingArtifactError, ValueError)):
        return EXIT_CONFIG
    return EXIT_NUMERICAL

def _run(ctx: click.Context, command) -> object:
    """
    Resolve the config from the global flags, run one command, and map failures to exit codes.

    Library errors are logged here and nowhere else: 2 for configuration and
    argument errors (including a missing trained-parameter file), 3 for
    numerical failures.
    """
    options = ctx.obj
    try:
        config = ConfigLoader.load(options["config_path"], {
            "run.seed": options["seed"],
            "output.dir": options["out_dir"],
            "run.threads": options["threads"],
        })
        module_logger.debug(f"Running {command.__name__} with seed {config.run.seed}, output in {config.output.dir}")
        return command(config)
    except CsoError as e:
        console_logger.error(f"Error: {e}")
        logger.exception(f"Detailed error in {command.__name__}:")
        ctx.exit(_exit_code(e))

@click.group()
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='YAML run file (nested or dotted keys).')
@click.option('--seed', type=click.IntRange(min=0, max=2 ** 64 - 1), default=None, help='Master seed.')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False), default=None, help='Output directory.')
@click.option('--threads', type=click.IntRange(min=1), default=None, help='Worker threads; never changes results.')
@click.option('-v', '--verbose', is_flag=True, help='Debug output on the console.')
@click.pass_context
def cli(ctx: click.Context, config_path, seed, out_dir, threads, verbose):
    """Unbiased MLMC gradient estimators for conditional stochastic optimization."""
    if verbose:
        set_console_level(logging.DEBUG)
    ctx.obj = {"config_path": config_path, "seed": seed, "out_dir": out_dir, "threads": threads}

@cli.command()
@click.pass_context
def beta(ctx):
    """Level-moment decay and the fitted beta."""
    _run(ctx, cmd_beta)

@cli.command()
@click.pass_context
def optimize(ctx):
    """Robbins-Monro runs over replicates; exits 3 if an estimator has no successful replicate."""
    results = _run(ctx, cmd_optimize)
    if any(result.succeeded == 0 for result in results):
        console_logger.error("At least one estimator diverged on every replicate")
        ctx.exit(EXIT_NUMERICAL)

@cli.command(name='compare-variance')
@click.pass_context
def compare_variance(ctx):
    """Variances of the squared-loss gradient estimators at matched cost."""
    _run(ctx, cmd_compare_variance)

@cli.command()
@click.pass_context
def gradcheck(ctx):
    """Finite-difference checks of the analytic gradients; exits 3 on failure."""
    reports = _run(ctx, cmd_gradcheck)
    failed = [name for name, report in reports.items() if not report.passed]
    if failed:
        for name in failed:
            worst = reports[name].worst
            console_logger.error(f"gradcheck failed for {name}: {worst.check} coordinate {worst.coordinate}, "
                                 f"analytic {worst.analytic!r}, numeric {worst.numeric!r}, rel err {worst.rel_err:.3e}")
        ctx.exit(EXIT_NUMERICAL)

@cli.command(name='iv-fit')
@click.pass_context
def iv_fit(ctx):
    """Fitted IV network on a grid plus a data scatter."""
    _run(ctx, cmd_iv_fit)

if __name__ == "__main__":
    cli()
