"""
dB spectra and power-supply induced intermodulation readout.

Levels are 20*log10 of the raw rectangular-window DFT magnitude (no 1/N
scaling), floored at FLOOR_DB. The seven marked components are the ripple f1,
its harmonic f2, the input f5 and the sidebands f5 -/+ f1 and f5 -/+ 2*f1.
"""
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError
from scipy import stats

from .exceptions import CdpaError, InvalidArgumentError
from .models import AsymmetrySweepEntry, CircuitConfig, ImdReport, SignalTrace, SpectralComponent, SpectrumReport
from .monitoring import RunMonitor
from .simulation import simulate
from .utils.executor import map_points
from .utils.file_processor import file_processor

logger = logging.getLogger(__name__)

FLOOR_DB = -200.0
COMPONENT_LABELS = ["f1", "f2", "f3", "f4", "f5", "f6", "f7"]
SPECTRUM_COLUMNS = ["freq_hz", "mag_db"]


def dft_db(trace: SignalTrace) -> SpectrumReport:
    """Levels of bins 0..N/2 of the rectangular-window DFT"""
    values = trace.values
    if values.size == 0:
        raise InvalidArgumentError("Cannot transform an empty trace")

    magnitudes = np.abs(np.fft.rfft(values))
    with np.errstate(divide="ignore"):
        levels = 20.0 * np.log10(magnitudes)
    levels = np.maximum(levels, FLOOR_DB)

    return SpectrumReport(
        bin_width=trace.sample_rate / values.size,
        num_samples=values.size,
        magnitudes_db=levels.tolist(),
    )


def imd_targets(input_freq: float, ripple_freq: float) -> Dict[str, float]:
    """Frequencies of the seven marked components"""
    return {
        "f1": ripple_freq,
        "f2": 2.0 * ripple_freq,
        "f3": input_freq - 2.0 * ripple_freq,
        "f4": input_freq - ripple_freq,
        "f5": input_freq,
        "f6": input_freq + ripple_freq,
        "f7": input_freq + 2.0 * ripple_freq,
    }


def measure_imd(spec: SpectrumReport, input_freq: float, ripple_freq: float) -> ImdReport:
    """Read the seven component levels at their nearest bins and the sideband asymmetries"""
    nyquist = spec.sample_rate / 2.0
    last_bin = len(spec.magnitudes_db) - 1
    components: List[SpectralComponent] = []

    for label, freq in imd_targets(input_freq, ripple_freq).items():
        if freq < 0 or freq > nyquist:
            raise InvalidArgumentError(f"Component {label} at {freq:g} Hz lies outside [0, {nyquist:g}] Hz")
        index = min(int(round(freq / spec.bin_width)), last_bin)
        components.append(SpectralComponent(label=label, freq_hz=freq, level_db=spec.magnitudes_db[index]))

    levels = {c.label: c.level_db for c in components}
    return ImdReport(
        input_freq=input_freq,
        ripple_freq=ripple_freq,
        components=components,
        psimd2_asym=abs(levels["f4"] - levels["f6"]),
        psimd3_asym=abs(levels["f3"] - levels["f7"]),
    )


def sweep_asymmetry(cfg: CircuitConfig, freqs: Sequence[float]) -> List[AsymmetrySweepEntry]:
    """Simulate and measure the sideband asymmetry at every input frequency"""
    if not freqs:
        raise InvalidArgumentError("Frequency sweep needs at least one frequency")

    monitor = RunMonitor("asymmetry sweep")
    base = cfg.model_dump()

    def run(freq: float) -> AsymmetrySweepEntry:
        try:
            with monitor.track(f"{freq:g} Hz"):
                point_cfg = CircuitConfig.model_validate({**base, "input_freq": freq})
                _, output = simulate(point_cfg)
                report = measure_imd(dft_db(output), point_cfg.input_freq, point_cfg.ripple_freq)
            return AsymmetrySweepEntry(input_freq=freq, report=report)
        except (CdpaError, ValidationError) as e:
            logger.warning(f"⚠️ Asymmetry sweep point {freq:g} Hz failed: {e}")
            return AsymmetrySweepEntry(input_freq=freq, error=str(e), error_type=type(e).__name__)

    entries = map_points(run, freqs)
    monitor.log_summary()
    return entries


def spectrum_error(reference: ImdReport, model: ImdReport) -> Dict[str, float]:
    """Absolute level difference in dB per marked component"""
    return {label: abs(reference.level(label) - model.level(label)) for label in COMPONENT_LABELS}


def asymmetry_trend(entries: Sequence[AsymmetrySweepEntry]) -> Dict[str, float]:
    """Spearman rank correlation of the input-ripple spacing with each asymmetry measure"""
    reports = [e.report for e in entries if e.ok]
    if len(reports) < 2:
        raise InvalidArgumentError("Trend needs at least two successful sweep points")

    spacing = [r.input_freq - r.ripple_freq for r in reports]
    psimd2 = stats.spearmanr(spacing, [r.psimd2_asym for r in reports])
    psimd3 = stats.spearmanr(spacing, [r.psimd3_asym for r in reports])
    return {"psimd2": float(psimd2.statistic), "psimd3": float(psimd3.statistic)}


def spectrum_frame(spec: SpectrumReport) -> pd.DataFrame:
    return pd.DataFrame({"freq_hz": spec.frequencies, "mag_db": spec.magnitudes_db}, columns=SPECTRUM_COLUMNS)


def asymmetry_frame(entries: Sequence[AsymmetrySweepEntry]) -> pd.DataFrame:
    """One row per sweep point; failed points keep their error text"""
    rows = []
    for entry in entries:
        row = {"input_freq": entry.input_freq, "psimd2_asym": np.nan, "psimd3_asym": np.nan, "error": entry.error or ""}
        if entry.ok:
            row["psimd2_asym"] = entry.report.psimd2_asym
            row["psimd3_asym"] = entry.report.psimd3_asym
        rows.append(row)
    return pd.DataFrame(rows, columns=["input_freq", "psimd2_asym", "psimd3_asym", "error"])


def save_spectrum(spec: SpectrumReport, path: Union[str, Path]) -> Path:
    """Write a spectrum as CSV `freq_hz,mag_db`"""
    return file_processor.write_frame(spectrum_frame(spec), path)
