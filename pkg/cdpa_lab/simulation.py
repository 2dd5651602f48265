"""
Half-bridge Class-D amplifier simulation.

The comparator drives a half bridge whose rail carries a sinusoidal ripple; the
bridge node feeds a second-order LC filter loaded by a resistor. The filter is
integrated with a fixed-step classical Runge-Kutta method and both the stimulus
and the filtered output are decimated onto the trace sample grid.
"""
import logging
import math
from pathlib import Path
from typing import Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import brentq

from .exceptions import InvalidArgumentError, SimulationDivergedError
from .models import BridgeTopology, CircuitConfig, SignalTrace, SwitchState, TracePair
from .utils.file_processor import file_processor

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["time_s", "input_v", "output_v"]


def triangle_carrier(t: float, freq: float, amp: float) -> float:
    """Symmetric triangle wave: -amp at t=0, rising over the first half period"""
    if not freq > 0:
        raise InvalidArgumentError(f"Carrier frequency must be positive, got {freq}")
    if not amp > 0:
        raise InvalidArgumentError(f"Carrier amplitude must be positive, got {amp}")
    return _triangle(t, freq, amp)


def _triangle(t: float, freq: float, amp: float) -> float:
    phase = (t * freq) % 1.0
    if phase < 0.5:
        return -amp + 4.0 * amp * phase
    return 3.0 * amp - 4.0 * amp * phase


def pwm_state(input_v: float, carrier_v: float) -> SwitchState:
    """Comparator output; equality resolves to LOW"""
    return SwitchState.HIGH if input_v > carrier_v else SwitchState.LOW


def supply_voltage(t: float, cfg: CircuitConfig) -> float:
    """Rail magnitude V_dd * (1 + ripple_fraction * sin(2*pi*ripple_freq*t))"""
    return cfg.supply_voltage * (1.0 + cfg.ripple_fraction * math.sin(2.0 * math.pi * cfg.ripple_freq * t))


def bridge_voltage(switch: SwitchState, supply: float, topology: BridgeTopology = BridgeTopology.BIPOLAR) -> float:
    """Voltage of the bridge node for a switch state and rail magnitude"""
    if switch == SwitchState.HIGH:
        return supply
    if topology == BridgeTopology.BIPOLAR:
        return -supply
    return 0.0


def cutoff_frequency(cfg: CircuitConfig) -> float:
    """Undamped corner frequency of the LC output filter"""
    return 1.0 / (2.0 * math.pi * math.sqrt(cfg.filter_inductance * cfg.filter_capacitance))


class _HalfBridgeIntegrator:
    """Fourth-order Runge-Kutta integrator of the LC filter state (i_L, v_C)"""

    def __init__(self, cfg: CircuitConfig):
        self.cfg = cfg
        self.inv_l = 1.0 / cfg.filter_inductance
        self.inv_c = 1.0 / cfg.filter_capacitance
        self.inv_r = 1.0 / cfg.load_resistance
        self.omega_r = 2.0 * math.pi * cfg.ripple_freq
        self.omega_in = 2.0 * math.pi * cfg.input_freq
        self.low_sign = -1.0 if cfg.bridge_topology == BridgeTopology.BIPOLAR else 0.0

    def input_voltage(self, t: float) -> float:
        return self.cfg.input_amp * math.sin(self.omega_in * t)

    def comparator_margin(self, t: float) -> float:
        return self.input_voltage(t) - _triangle(t, self.cfg.carrier_freq, self.cfg.carrier_amp)

    def rail(self, t: float, high: bool) -> float:
        supply = self.cfg.supply_voltage * (1.0 + self.cfg.ripple_fraction * math.sin(self.omega_r * t))
        return supply if high else self.low_sign * supply

    def step(self, i_l: float, v_c: float, t: float, h: float, high: bool) -> Tuple[float, float]:
        inv_l, inv_c, inv_r = self.inv_l, self.inv_c, self.inv_r
        v0 = self.rail(t, high)
        vm = self.rail(t + 0.5 * h, high)
        v1 = self.rail(t + h, high)

        k1i = (v0 - v_c) * inv_l
        k1v = (i_l - v_c * inv_r) * inv_c
        i2, c2 = i_l + 0.5 * h * k1i, v_c + 0.5 * h * k1v
        k2i = (vm - c2) * inv_l
        k2v = (i2 - c2 * inv_r) * inv_c
        i3, c3 = i_l + 0.5 * h * k2i, v_c + 0.5 * h * k2v
        k3i = (vm - c3) * inv_l
        k3v = (i3 - c3 * inv_r) * inv_c
        i4, c4 = i_l + h * k3i, v_c + h * k3v
        k4i = (v1 - c4) * inv_l
        k4v = (i4 - c4 * inv_r) * inv_c

        i_next = i_l + h / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
        v_next = v_c + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        return i_next, v_next


def simulate(cfg: CircuitConfig) -> Tuple[SignalTrace, SignalTrace]:
    """
    Simulate the amplifier from rest and sample the configured window.

    Args:
        cfg: Circuit configuration

    Returns:
        Tuple of (input trace, output trace) on the sample grid
    """
    integrator = _HalfBridgeIntegrator(cfg)
    dt = cfg.internal_step
    decimation = cfg.decimation
    num_samples = cfg.num_samples
    first_step = int(round(cfg.window_start / dt))
    last_step = first_step + (num_samples - 1) * decimation

    logger.info(
        f"Simulating {cfg.input_freq:g} Hz input over [{cfg.window_start:g}, {cfg.window_end:g}] s "
        f"with {last_step} steps of {dt:g} s"
    )

    inputs = np.empty(num_samples)
    outputs = np.empty(num_samples)
    i_l = 0.0
    v_c = 0.0
    margin = integrator.comparator_margin(0.0)
    sample = 0

    for k in range(last_step + 1):
        t0 = k * dt
        if k >= first_step and (k - first_step) % decimation == 0:
            inputs[sample] = integrator.input_voltage(t0)
            outputs[sample] = v_c
            sample += 1
            if k == last_step:
                break

        t1 = (k + 1) * dt
        high = margin > 0.0
        next_margin = integrator.comparator_margin(t1)
        next_high = next_margin > 0.0

        if cfg.edge_interpolation and high != next_high:
            t_edge = brentq(integrator.comparator_margin, t0, t1, xtol=1e-18, rtol=4 * np.finfo(float).eps)
            h_first = t_edge - t0
            h_second = t1 - t_edge
            if h_first > 0.0:
                i_l, v_c = integrator.step(i_l, v_c, t0, h_first, high)
            if h_second > 0.0:
                i_l, v_c = integrator.step(i_l, v_c, t_edge, h_second, next_high)
        else:
            i_l, v_c = integrator.step(i_l, v_c, t0, dt, high)

        if not (math.isfinite(i_l) and math.isfinite(v_c)):
            raise SimulationDivergedError(step=k + 1)
        margin = next_margin

    logger.debug(f"Simulation finished, output peak {np.max(np.abs(outputs)):.4f} V")
    return (
        SignalTrace.from_array(inputs, cfg.sample_rate, cfg.window_start),
        SignalTrace.from_array(outputs, cfg.sample_rate, cfg.window_start),
    )


def simulate_pair(cfg: CircuitConfig) -> TracePair:
    """Simulate and bundle the traces for training"""
    input_trace, output_trace = simulate(cfg)
    return TracePair(input=input_trace, output=output_trace)


def traces_to_frame(pair: TracePair) -> pd.DataFrame:
    """Tabulate a trace pair with the CSV column layout"""
    return pd.DataFrame({
        "time_s": pair.input.times,
        "input_v": pair.input.values,
        "output_v": pair.output.values,
    }, columns=TRACE_COLUMNS)


def save_traces(pair: TracePair, path: Union[str, Path]) -> Path:
    """Write traces as CSV `time_s,input_v,output_v` at full double precision"""
    path = file_processor.write_frame(traces_to_frame(pair), path)
    logger.info(f"Wrote {len(pair.input)} trace rows to {path}")
    return path


def load_traces(path: Union[str, Path]) -> TracePair:
    """Read traces written by save_traces"""
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except FileNotFoundError as e:
        raise InvalidArgumentError(f"Trace file not found: {path}") from e

    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise InvalidArgumentError(f"Trace file {path} lacks columns: {', '.join(missing)}")
    if len(frame) < 2:
        raise InvalidArgumentError(f"Trace file {path} needs at least two rows")

    times = frame["time_s"].to_numpy()
    # CSV times carry rounding; the grid itself is uniform
    sample_rate = float(np.round((len(times) - 1) / (times[-1] - times[0]), 6))
    start_time = float(times[0])
    return TracePair(
        input=SignalTrace.from_array(frame["input_v"].to_numpy(), sample_rate, start_time),
        output=SignalTrace.from_array(frame["output_v"].to_numpy(), sample_rate, start_time),
    )
