"""
Command-line entry point.

    python -m cdpa_lab.main simulate --config experiment.cfg --out results/
    python -m cdpa_lab.main train --model ewnn
    python -m cdpa_lab.main compare
    python -m cdpa_lab.main sweep --kind hidden --model benn

Exit codes: 0 success, 2 usage/configuration/output error, 3 numerical divergence.
"""
import functools
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import click
import numpy as np
from pydantic import ValidationError

from config import settings
from .behavioral.elman import model_from_document, parameter_count
from .behavioral.volterra import fit_volterra_laguerre, volterra_predict
from .exceptions import ConfigError, DivergenceError, InvalidArgumentError, OutputError
from .models import (
    ComparisonReport,
    ExperimentConfig,
    ImdReport,
    ModelComparison,
    ModelKind,
    TracePair,
    TrainConfig,
)
from .simulation import load_traces, save_traces, simulate_pair
from .spectrum import (
    asymmetry_frame,
    asymmetry_trend,
    dft_db,
    measure_imd,
    save_spectrum,
    spectrum_error,
    sweep_asymmetry,
)
from .training import (
    compare_ab_updates,
    iterations_to_reach,
    save_curve,
    select_hidden_count,
    sweep_hidden,
    train,
    train_to_trace,
)
from .utils.file_processor import file_processor
from .utils.mapping_engine import load_config

logger = logging.getLogger(__name__)

EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3

VOLTERRA = "volterra"
MODEL_CHOICES = [kind.value for kind in ModelKind] + [VOLTERRA]
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(verbose: bool = False):
    """Stream handler plus an optional file handler, level from settings"""
    log_config = settings.get_logging_config()
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_config["file"]:
        handlers.append(logging.FileHandler(log_config["file"]))
    logging.basicConfig(
        level=logging.DEBUG if verbose else log_config["level"],
        format=LOG_FORMAT,
        handlers=handlers,
        force=True,
    )


def handle_errors(command: Callable) -> Callable:
    """Map toolkit exceptions onto exit codes"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (ConfigError, OutputError, InvalidArgumentError) as e:
            logger.error(f"❌ {e}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_CONFIG)
        except DivergenceError as e:
            logger.error(f"❌ {e}")
            click.echo(f"Error: {e}", err=True)
            sys.exit(EXIT_DIVERGENCE)

    return wrapper


def common_options(command: Callable) -> Callable:
    command = click.option("--seed", type=int, default=None, help="Override train.seed")(command)
    command = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                           help="Output directory")(command)
    command = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                           help="Experiment configuration file")(command)
    return command


def load_experiment(config_path: Optional[str], seed: Optional[int], out_dir: Optional[str]) -> Tuple[ExperimentConfig, Path]:
    """Resolved configuration and a writable output directory"""
    cfg = load_config(config_path)
    if seed is not None:
        try:
            train_cfg = TrainConfig.model_validate({**cfg.train.model_dump(), "seed": seed})
        except ValidationError as e:
            raise ConfigError(f"Invalid --seed {seed}: {e}") from e
        cfg = cfg.model_copy(update={"train": train_cfg})
    out = file_processor.prepare_output_dir(out_dir or cfg.output.directory)
    return cfg, out


def load_data(cfg: ExperimentConfig) -> TracePair:
    """Stored traces when data.trace_file is set, otherwise a fresh simulation"""
    if cfg.data.trace_file:
        logger.info(f"📂 Loading traces from {cfg.data.trace_file}")
        return load_traces(cfg.data.trace_file)
    return simulate_pair(cfg.circuit)


def train_config_for(cfg: ExperimentConfig, model: Optional[str]) -> TrainConfig:
    if model is None:
        return cfg.train
    return cfg.train.model_copy(update={"model_kind": ModelKind(model)})


def failure_exit_code(error_types: Sequence[Optional[str]]) -> int:
    """Exit code when every sweep point failed"""
    if any(t and t.endswith("DivergedError") for t in error_types):
        return EXIT_DIVERGENCE
    return EXIT_CONFIG


@click.group()
@click.option("--verbose", is_flag=True, help="Log at DEBUG level")
@click.version_option(settings.app_version, prog_name=settings.app_name)
def cli(verbose: bool):
    """Class-D amplifier simulation and behavioral modeling experiments"""
    configure_logging(verbose)


@cli.command()
@common_options
@handle_errors
def simulate(config_path: Optional[str], out_dir: Optional[str], seed: Optional[int]):
    """Simulate the amplifier and write traces.csv"""
    cfg, out = load_experiment(config_path, seed, out_dir)
    pair = simulate_pair(cfg.circuit)
    save_traces(pair, out / "traces.csv")
    file_processor.write_json(cfg, out / "config.json")
    click.echo(f"Wrote {len(pair.input)} samples to {out / 'traces.csv'}")


@cli.command(name="train")
@common_options
@click.option("--model", type=click.Choice(MODEL_CHOICES), default=None, help="Model to train")
@handle_errors
def train_command(config_path: Optional[str], out_dir: Optional[str], seed: Optional[int], model: Optional[str]):
    """Train one behavioral model and write its record"""
    cfg, out = load_experiment(config_path, seed, out_dir)
    data = load_data(cfg)
    file_processor.write_json(cfg, out / "config.json")

    if model == VOLTERRA:
        fit = fit_volterra_laguerre(data.input, data.output, cfg.laguerre)
        file_processor.write_json(fit, out / "train_volterra.json")
        click.echo(f"volterra: {fit.parameter_count} parameters, residual SSE {fit.residual_sse:.6g}")
        return

    train_cfg = train_config_for(cfg, model)
    name = train_cfg.model_kind.value
    record = train(data, train_cfg)
    file_processor.write_json(record, out / f"train_{name}.json")
    save_curve(record.sse_curve, out / f"sse_{name}.csv")
    click.echo(f"{name}: {record.iterations_used} iterations ({record.stop_reason.value}), "
               f"SSE {record.final_sse:.6g}")


def _compare_network(kind: ModelKind, cfg: ExperimentConfig, data: TracePair, measured: ImdReport,
                     out: Path) -> ModelComparison:
    train_cfg = cfg.train.model_copy(update={"model_kind": kind,
                                             "max_iterations": cfg.sweep.compare_max_iterations})
    record = train(data, train_cfg)
    reconstructed = train_to_trace(record, data)
    report = measure_imd(dft_db(reconstructed), measured.input_freq, measured.ripple_freq)
    state, wp = model_from_document(record.final_model)
    save_traces(TracePair(input=data.input, output=reconstructed), out / f"reconstructed_{kind.value}.csv")
    return ModelComparison(
        model=kind.value,
        sse=record.final_sse,
        max_time_error=record.max_time_error,
        spectrum_error_db=spectrum_error(measured, report),
        parameter_count=parameter_count(state, wp),
        iterations=record.iterations_used,
    )


def _compare_volterra(cfg: ExperimentConfig, data: TracePair, measured: ImdReport, out: Path) -> ModelComparison:
    fit = fit_volterra_laguerre(data.input, data.output, cfg.laguerre)
    reconstructed = volterra_predict(fit, data.input, cfg.laguerre)
    report = measure_imd(dft_db(reconstructed), measured.input_freq, measured.ripple_freq)
    save_traces(TracePair(input=data.input, output=reconstructed), out / f"reconstructed_{VOLTERRA}.csv")
    return ModelComparison(
        model=VOLTERRA,
        sse=fit.residual_sse,
        max_time_error=float(np.max(np.abs(data.output.values - reconstructed.values))),
        spectrum_error_db=spectrum_error(measured, report),
        parameter_count=fit.parameter_count,
    )


@cli.command()
@common_options
@handle_errors
def compare(config_path: Optional[str], out_dir: Optional[str], seed: Optional[int]):
    """Compare BENN, EWNN and Volterra-Laguerre in time and frequency"""
    cfg, out = load_experiment(config_path, seed, out_dir)
    data = load_data(cfg)
    file_processor.write_json(cfg, out / "config.json")

    spectrum = dft_db(data.output)
    save_spectrum(spectrum, out / "spectrum_measured.csv")
    measured = measure_imd(spectrum, cfg.circuit.input_freq, cfg.circuit.ripple_freq)

    runners: List[Tuple[str, Callable[[], ModelComparison]]] = [
        (ModelKind.BENN.value, lambda: _compare_network(ModelKind.BENN, cfg, data, measured, out)),
        (ModelKind.EWNN.value, lambda: _compare_network(ModelKind.EWNN, cfg, data, measured, out)),
        (VOLTERRA, lambda: _compare_volterra(cfg, data, measured, out)),
    ]
    models: List[ModelComparison] = []
    error_types: List[str] = []
    for name, run in runners:
        try:
            models.append(run())
        except (DivergenceError, InvalidArgumentError, ValidationError) as e:
            logger.warning(f"⚠️ Model {name} failed: {e}")
            models.append(ModelComparison(model=name, error=str(e)))
            error_types.append(type(e).__name__)

    report = ComparisonReport(measured=measured, models=models)
    file_processor.write_json(report, out / "comparison.json")
    for entry in models:
        status = entry.error or f"SSE {entry.sse:.6g}, max error {entry.max_time_error:.6g} V"
        click.echo(f"{entry.model}: {status}")

    if len(error_types) == len(models):
        sys.exit(failure_exit_code(error_types))


def _hidden_summary(entries, target_sse: float) -> List[Dict[str, Any]]:
    rows = []
    for entry in entries:
        row: Dict[str, Any] = {"hidden_count": entry.hidden_count, "error": entry.error,
                               "error_type": entry.error_type}
        if entry.ok:
            row.update({
                "iterations_used": entry.record.iterations_used,
                "stop_reason": entry.record.stop_reason.value,
                "final_sse": entry.record.final_sse,
                "iterations_to_target": iterations_to_reach(entry.record.sse_curve, target_sse),
            })
        rows.append(row)
    return rows


@cli.command()
@common_options
@click.option("--kind", type=click.Choice(["hidden", "frequency", "ab-updates"]), required=True,
              help="Sweep to run")
@click.option("--model", type=click.Choice([kind.value for kind in ModelKind]), default=None,
              help="Network for the hidden-size sweep")
@handle_errors
def sweep(config_path: Optional[str], out_dir: Optional[str], seed: Optional[int], kind: str,
          model: Optional[str]):
    """Hidden-size, input-frequency or a/b-update sweeps"""
    cfg, out = load_experiment(config_path, seed, out_dir)
    file_processor.write_json(cfg, out / "config.json")

    if kind == "frequency":
        entries = sweep_asymmetry(cfg.circuit, cfg.sweep.frequencies)
        file_processor.write_frame(asymmetry_frame(entries), out / "asymmetry.csv")
        ok = [e for e in entries if e.ok]
        trend = asymmetry_trend(entries) if len(ok) >= 2 else None
        file_processor.write_json({"entries": entries, "trend": trend}, out / "asymmetry.json")
        click.echo(f"{len(ok)}/{len(entries)} frequencies measured")
        if not ok:
            sys.exit(failure_exit_code([e.error_type for e in entries]))
        return

    data = load_data(cfg)
    train_cfg = train_config_for(cfg, model)

    if kind == "ab-updates":
        comparison = compare_ab_updates(data, train_cfg)
        save_curve(comparison.updates_on.sse_curve, out / "sse_ab_on.csv")
        save_curve(comparison.updates_off.sse_curve, out / "sse_ab_off.csv")
        file_processor.write_json({
            "fluctuation_on": comparison.fluctuation_on,
            "fluctuation_off": comparison.fluctuation_off,
            "iterations_on": comparison.updates_on.iterations_used,
            "iterations_off": comparison.updates_off.iterations_used,
            "final_sse_on": comparison.updates_on.final_sse,
            "final_sse_off": comparison.updates_off.final_sse,
        }, out / "ab_updates.json")
        click.echo(f"fluctuation with a/b updates {comparison.fluctuation_on:.6g}, "
                   f"without {comparison.fluctuation_off:.6g}")
        return

    hidden_values = cfg.sweep.hidden_benn if train_cfg.model_kind == ModelKind.BENN else cfg.sweep.hidden_ewnn
    entries = sweep_hidden(data, train_cfg, hidden_values)
    for entry in entries:
        if entry.ok:
            save_curve(entry.record.sse_curve, out / f"sse_L{entry.hidden_count:03d}.csv")
    file_processor.write_json(_hidden_summary(entries, cfg.sweep.target_sse), out / "hidden_sweep.json")

    ok = [e for e in entries if e.ok]
    click.echo(f"{len(ok)}/{len(entries)} hidden sizes trained")
    if not ok:
        sys.exit(failure_exit_code([e.error_type for e in entries]))
    selection = select_hidden_count(entries, cfg.sweep.target_sse, train_cfg.max_iterations)
    file_processor.write_json(selection, out / "hidden_selection.json")
    click.echo(f"Selected L={selection.hidden_count}")


if __name__ == "__main__":
    cli()
