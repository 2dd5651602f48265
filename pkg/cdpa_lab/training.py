"""
Full-batch training of the Elman networks and the sweeps built on it.

The whole input trace, divided by its length N, is the network input u and the
whole output trace is the target y_d (M = N) in volts. Each iteration evaluates
the network, records E(p) = 1/2 ||y_d - y||^2, stops when E(p) drops below the
threshold or the iteration cap is reached, and otherwise applies one gradient
step. The context layer is carried from one iteration to the next.
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from .behavioral.elman import (
    ElmanState,
    ForwardPass,
    WaveletParams,
    benn_grad_step,
    benn_pass,
    ewnn_grad_step,
    ewnn_pass,
    model_from_document,
    model_to_document,
)
from .exceptions import CdpaError, InvalidArgumentError, TrainingDivergedError
from .models import (
    AbUpdateComparison,
    HiddenSelection,
    ModelKind,
    SignalTrace,
    StopReason,
    TracePair,
    TrainConfig,
    TrainingRecord,
    TrainingSweepEntry,
)
from .monitoring import RunMonitor
from .utils.executor import map_points
from .utils.file_processor import file_processor

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["iteration", "sse"]


def sse(y_d: Sequence[float], y: Sequence[float]) -> float:
    """1/2 * sum((y_d - y)^2)"""
    y_d = np.asarray(y_d, dtype=float)
    y = np.asarray(y, dtype=float)
    if y_d.shape != y.shape:
        raise InvalidArgumentError(f"Length mismatch: {y_d.shape} vs {y.shape}")
    diff = y_d - y
    return 0.5 * float(diff @ diff)


def network_input(trace: SignalTrace) -> np.ndarray:
    """Stimulus as the input layer sees it: every sample divided by the trace length"""
    values = trace.values
    return values / values.size


def init_model(cfg: TrainConfig, input_size: int, output_size: int) -> Tuple[ElmanState, Optional[WaveletParams]]:
    """Zero weights, zero context and memory; seeded translation factors for wavelet networks"""
    state = ElmanState.zeros(input_size, cfg.hidden_count, output_size, cfg.alpha)
    wp = None
    if cfg.model_kind.is_wavelet:
        rng = np.random.default_rng(cfg.seed)
        wp = WaveletParams.initial(cfg.hidden_count, rng, update_enabled=cfg.model_kind == ModelKind.EWNN_AB)
    return state, wp


def _forward(state: ElmanState, wp: Optional[WaveletParams], u: np.ndarray) -> ForwardPass:
    if wp is None:
        return benn_pass(state, u)
    return ewnn_pass(state, wp, u)


def train(data: TracePair, cfg: TrainConfig) -> TrainingRecord:
    """
    Train one network on a trace pair.

    Args:
        data: Stimulus (network input) and response (target)
        cfg: Training configuration

    Returns:
        TrainingRecord with the SSE curve, stop reason and final model
    """
    u = network_input(data.input)
    y_d = data.output.values
    state, wp = init_model(cfg, u.size, y_d.size)
    rates = cfg.rates

    logger.info(
        f"🚀 Training {cfg.model_kind.value} with L={cfg.hidden_count}, N={u.size}, "
        f"N_max={cfg.max_iterations}, threshold={cfg.sse_threshold:g}"
    )

    curve: List[float] = []
    iteration = 0
    while True:
        iteration += 1
        fp = _forward(state, wp, u)
        error = sse(y_d, fp.y)
        if not np.isfinite(error):
            raise TrainingDivergedError(iteration)
        curve.append(error)
        logger.debug(f"Iteration {iteration}: E = {error:.6e}")

        if error < cfg.sse_threshold:
            stop_reason = StopReason.THRESHOLD_MET
            break
        if iteration >= cfg.max_iterations:
            stop_reason = StopReason.MAX_ITERATIONS
            break

        if wp is None:
            benn_grad_step(state, u, y_d, rates["eta1"], rates["eta2"], rates["eta3"],
                           forward=fp, iteration=iteration)
        else:
            ewnn_grad_step(state, wp, u, y_d, rates["eta1"], rates["eta2"], rates["eta3"],
                           rates["eta4"], rates["eta5"], forward=fp, iteration=iteration)

    max_time_error = float(np.max(np.abs(y_d - fp.y)))
    logger.info(
        f"✅ {cfg.model_kind.value} L={cfg.hidden_count} stopped after {iteration} iterations "
        f"({stop_reason.value}), E = {curve[-1]:.6e}"
    )

    return TrainingRecord(
        sse_curve=curve,
        iterations_used=iteration,
        stop_reason=stop_reason,
        final_sse=curve[-1],
        max_time_error=max_time_error,
        final_model=model_to_document(state, cfg.model_kind, cfg.seed, wp, input_scale=float(u.size)),
        config_echo=cfg,
    )


def train_to_trace(record: TrainingRecord, data: TracePair) -> SignalTrace:
    """Output of the final model on the training input"""
    state, wp = model_from_document(record.final_model)
    fp = _forward(state, wp, data.input.values / record.final_model.input_scale)
    return SignalTrace.from_array(fp.y, data.output.sample_rate, data.output.start_time)


def sweep_hidden(data: TracePair, base_cfg: TrainConfig, hidden_values: Sequence[int]) -> List[TrainingSweepEntry]:
    """
    Train one network per hidden-layer size with the same data and seed.

    A failing size is recorded on its entry and the sweep continues.
    """
    if not hidden_values:
        raise InvalidArgumentError("Hidden-size sweep needs at least one value")

    monitor = RunMonitor(f"hidden sweep ({base_cfg.model_kind.value})")
    base = base_cfg.model_dump()

    def run(hidden_count: int) -> TrainingSweepEntry:
        try:
            with monitor.track(f"L={hidden_count}"):
                cfg = TrainConfig.model_validate({**base, "hidden_count": hidden_count})
                record = train(data, cfg)
            return TrainingSweepEntry(hidden_count=hidden_count, record=record)
        except (CdpaError, ValidationError) as e:
            logger.warning(f"⚠️ Hidden sweep point L={hidden_count} failed: {e}")
            return TrainingSweepEntry(hidden_count=hidden_count, error=str(e), error_type=type(e).__name__)

    entries = map_points(run, hidden_values)
    monitor.log_summary()
    return entries


def compare_ab_updates(data: TracePair, cfg: TrainConfig) -> AbUpdateComparison:
    """Train the wavelet network twice from one seed, with and without a/b updates"""
    updates_on = train(data, cfg.model_copy(update={"model_kind": ModelKind.EWNN_AB}))
    updates_off = train(data, cfg.model_copy(update={"model_kind": ModelKind.EWNN}))
    return AbUpdateComparison(
        updates_on=updates_on,
        updates_off=updates_off,
        fluctuation_on=curve_fluctuation(updates_on.sse_curve),
        fluctuation_off=curve_fluctuation(updates_off.sse_curve),
    )


def iterations_to_reach(curve: Sequence[float], level: float) -> Optional[int]:
    """First 1-based iteration whose SSE is below level"""
    for index, value in enumerate(curve, start=1):
        if value < level:
            return index
    return None


def curve_fluctuation(curve: Sequence[float], skip: int = 5) -> float:
    """Mean absolute first difference of the curve after the first `skip` iterations"""
    tail = np.asarray(curve[skip:], dtype=float)
    if tail.size < 2:
        return 0.0
    return float(np.mean(np.abs(np.diff(tail))))


def select_hidden_count(entries: Sequence[TrainingSweepEntry], target_sse: float,
                        iteration_budget: int) -> HiddenSelection:
    """
    Pick the smallest hidden size whose curve reaches target_sse within the budget.

    Falls back to the size with the lowest final SSE when none does.
    """
    usable = sorted((e for e in entries if e.ok), key=lambda e: e.hidden_count)
    if not usable:
        raise InvalidArgumentError("No successful sweep entries to select from")

    for entry in usable:
        reached_at = iterations_to_reach(entry.record.sse_curve, target_sse)
        if reached_at is not None and reached_at <= iteration_budget:
            return HiddenSelection(hidden_count=entry.hidden_count, target_sse=target_sse,
                                   iteration_budget=iteration_budget, reached=True, iterations=reached_at)

    best = min(usable, key=lambda e: e.record.final_sse)
    logger.warning(f"⚠️ No hidden size reached SSE {target_sse:g} in {iteration_budget} iterations; "
                   f"falling back to L={best.hidden_count}")
    return HiddenSelection(hidden_count=best.hidden_count, target_sse=target_sse,
                           iteration_budget=iteration_budget, reached=False, iterations=None)


def curve_frame(curve: Sequence[float]) -> pd.DataFrame:
    """SSE curve as `iteration,sse` rows"""
    return pd.DataFrame({"iteration": np.arange(1, len(curve) + 1), "sse": list(curve)}, columns=CURVE_COLUMNS)


def save_curve(curve: Sequence[float], path: Union[str, Path]) -> Path:
    """Write an SSE curve as CSV `iteration,sse`"""
    return file_processor.write_frame(curve_frame(curve), path)
