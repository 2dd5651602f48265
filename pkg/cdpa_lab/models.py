from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Optional, List, Dict, Any
from enum import Enum
import math

import numpy as np


class BridgeTopology(str, Enum):
    BIPOLAR = "bipolar"
    SINGLE_ENDED = "single_ended"


class SwitchState(int, Enum):
    LOW = 0
    HIGH = 1


class ModelKind(str, Enum):
    BENN = "benn"
    EWNN = "ewnn"
    EWNN_AB = "ewnn-ab"  # EWNN with scale/translation updates

    @property
    def is_wavelet(self) -> bool:
        return self is not ModelKind.BENN


class StopReason(str, Enum):
    THRESHOLD_MET = "threshold-met"
    MAX_ITERATIONS = "max-iterations"


# Circuit Models
class CircuitConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    supply_voltage: float = Field(10.0, gt=0, description="Nominal rail V_dd in volts")
    ripple_fraction: float = Field(0.05, ge=0, lt=1, description="Relative supply ripple amplitude")
    ripple_freq: float = Field(400.0, gt=0, description="Supply ripple frequency in Hz")
    carrier_freq: float = Field(58000.0, gt=0, description="Triangle carrier frequency in Hz")
    carrier_amp: float = Field(4.0, gt=0, description="Triangle carrier amplitude in volts")
    input_amp: float = Field(3.0, ge=0, description="Input sinusoid amplitude in volts")
    input_freq: float = Field(3700.0, gt=0, description="Input sinusoid frequency in Hz")
    filter_inductance: float = Field(56e-6, gt=0, description="Output filter inductance in henries")
    filter_capacitance: float = Field(4.7e-6, gt=0, description="Output filter capacitance in farads")
    load_resistance: float = Field(8.0, gt=0, description="Load resistance in ohms")
    internal_step: float = Field(1e-7, gt=0, description="Integration step in seconds")
    sample_rate: float = Field(100e3, gt=0, description="Trace sample rate in Hz")
    window_start: float = Field(10e-3, ge=0, description="Start of the sampled window in seconds")
    window_end: float = Field(20e-3, gt=0, description="End of the sampled window in seconds")
    bridge_topology: BridgeTopology = Field(BridgeTopology.BIPOLAR, description="Bridge output convention")
    edge_interpolation: bool = Field(False, description="Split integration steps at PWM edges")

    @model_validator(mode="after")
    def validate_circuit(self) -> "CircuitConfig":
        if self.internal_step > 1.0 / (20.0 * self.carrier_freq) * (1 + 1e-12):
            raise ValueError("internal_step must resolve PWM edges (<= 1/(20*carrier_freq))")
        decimation = 1.0 / (self.internal_step * self.sample_rate)
        if round(decimation) < 1 or abs(decimation - round(decimation)) > 1e-6:
            raise ValueError("sample_rate must divide 1/internal_step evenly")
        if self.window_end <= self.window_start:
            raise ValueError("window_end must be greater than window_start")
        start_steps = self.window_start / self.internal_step
        if abs(start_steps - round(start_steps)) > 1e-6:
            raise ValueError("window_start must fall on an integration step")
        if not self.input_amp < self.carrier_amp:
            raise ValueError("input_amp must stay below carrier_amp (no over-modulation)")
        return self

    @property
    def decimation(self) -> int:
        return int(round(1.0 / (self.internal_step * self.sample_rate)))

    @property
    def num_samples(self) -> int:
        return int(round((self.window_end - self.window_start) * self.sample_rate))


class SignalTrace(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_rate: float = Field(..., gt=0, description="Sample rate in Hz")
    start_time: float = Field(0.0, description="Time of the first sample in seconds")
    samples: List[float] = Field(..., description="Voltage samples")

    @field_validator("samples")
    @classmethod
    def validate_samples(cls, v: List[float]) -> List[float]:
        if len(v) == 0:
            raise ValueError("Trace must contain at least one sample")
        if not all(math.isfinite(s) for s in v):
            raise ValueError("Trace samples must be finite")
        return v

    @classmethod
    def from_array(cls, values: np.ndarray, sample_rate: float, start_time: float = 0.0) -> "SignalTrace":
        return cls(sample_rate=sample_rate, start_time=start_time,
                   samples=np.asarray(values, dtype=float).tolist())

    @property
    def values(self) -> np.ndarray:
        return np.asarray(self.samples, dtype=float)

    @property
    def times(self) -> np.ndarray:
        return self.start_time + np.arange(len(self.samples)) / self.sample_rate

    def __len__(self) -> int:
        return len(self.samples)


class TracePair(BaseModel):
    """Stimulus and response sampled on the same grid"""
    model_config = ConfigDict(frozen=True)

    input: SignalTrace
    output: SignalTrace

    @model_validator(mode="after")
    def validate_pair(self) -> "TracePair":
        if len(self.input) != len(self.output):
            raise ValueError("Input and output traces must have equal length")
        return self


# Behavioral Model Configuration
class LaguerreConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    num_basis: int = Field(5, ge=1, description="Number of Laguerre stages K")
    pole: float = Field(0.994, description="Laguerre pole lambda")
    max_order: int = Field(3, ge=1, description="Highest polynomial degree P")
    symmetric_kernels: bool = Field(True, description="Use multisets of stage indices")

    @field_validator("pole")
    @classmethod
    def validate_pole(cls, v: float) -> float:
        if not abs(v) < 1:
            raise ValueError("Laguerre pole must satisfy |pole| < 1")
        return v


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", protected_namespaces=())

    model_kind: ModelKind = Field(ModelKind.EWNN, description="Network variant")
    hidden_count: int = Field(30, ge=1, description="Hidden neurons L")
    max_iterations: int = Field(100, ge=1, description="Iteration cap N_max")
    sse_threshold: float = Field(1e-3, gt=0, description="Stopping threshold epsilon_min")
    alpha: float = Field(0.001, description="Context self-loop coefficient")
    eta1: float = Field(0.01, ge=0, description="Learning rate of W1")
    eta2: float = Field(0.01, ge=0, description="Learning rate of W2")
    eta3: float = Field(0.01, ge=0, description="Learning rate of W3")
    eta4: float = Field(0.01, ge=0, description="Learning rate of scale factors a")
    eta5: float = Field(0.01, ge=0, description="Learning rate of translation factors b")
    seed: int = Field(0, ge=0, description="Seed of the parameter generator")

    @property
    def rates(self) -> Dict[str, float]:
        return {"eta1": self.eta1, "eta2": self.eta2, "eta3": self.eta3,
                "eta4": self.eta4, "eta5": self.eta5}


class ModelDocument(BaseModel):
    """Serialized network weights and wavelet parameters"""
    model_config = ConfigDict(protected_namespaces=())

    model_kind: ModelKind
    input_size: int = Field(..., ge=1)
    hidden_count: int = Field(..., ge=1)
    output_size: int = Field(..., ge=1)
    alpha: float
    seed: int
    W1: List[float] = Field(..., description="Hidden-to-output weights, L x M row-major")
    W2: List[float] = Field(..., description="Input-to-hidden weights, N x L row-major")
    W3: List[float] = Field(..., description="Context-to-hidden weights, L x L row-major")
    a: Optional[List[float]] = Field(None, description="Wavelet scale factors")
    b: Optional[List[float]] = Field(None, description="Wavelet translation factors")
    context: Optional[List[float]] = Field(None, description="Context activations X_c; zero when absent")
    wavelet_updates: bool = False
    input_scale: float = Field(1.0, gt=0, description="Divisor applied to the stimulus before the input layer")


class TrainingRecord(BaseModel):
    sse_curve: List[float] = Field(..., description="E(p) for every iteration")
    iterations_used: int = Field(..., ge=1)
    stop_reason: StopReason
    final_sse: float = Field(..., ge=0)
    max_time_error: float = Field(..., ge=0, description="Max absolute output error of the final model in volts")
    final_model: ModelDocument
    config_echo: TrainConfig

    @model_validator(mode="after")
    def validate_record(self) -> "TrainingRecord":
        if len(self.sse_curve) != self.iterations_used:
            raise ValueError("sse_curve length must equal iterations_used")
        if any(e < 0 for e in self.sse_curve):
            raise ValueError("SSE values must be non-negative")
        if self.stop_reason == StopReason.THRESHOLD_MET and not self.sse_curve[-1] < self.config_echo.sse_threshold:
            raise ValueError("threshold-met requires the last SSE below the threshold")
        return self


class TrainingSweepEntry(BaseModel):
    hidden_count: int
    record: Optional[TrainingRecord] = None
    error: Optional[str] = None
    error_type: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.record is not None


class AbUpdateComparison(BaseModel):
    updates_on: TrainingRecord
    updates_off: TrainingRecord
    fluctuation_on: float = Field(..., description="Mean |first difference| of the SSE curve after iteration 5")
    fluctuation_off: float


class HiddenSelection(BaseModel):
    hidden_count: int
    target_sse: float
    iteration_budget: int
    reached: bool = Field(..., description="Whether the target was met within the budget")
    iterations: Optional[int] = None


# Spectrum Models
class SpectrumReport(BaseModel):
    bin_width: float = Field(..., gt=0, description="Frequency resolution in Hz")
    num_samples: int = Field(..., ge=1)
    magnitudes_db: List[float] = Field(..., description="Levels of bins 0..N/2 in dB")

    @property
    def sample_rate(self) -> float:
        return self.bin_width * self.num_samples

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(len(self.magnitudes_db)) * self.bin_width


class SpectralComponent(BaseModel):
    label: str = Field(..., description="Marker name f1..f7")
    freq_hz: float
    level_db: float


class ImdReport(BaseModel):
    input_freq: float
    ripple_freq: float
    components: List[SpectralComponent] = Field(..., min_length=7, max_length=7)
    psimd2_asym: float = Field(..., ge=0, description="|level(f4) - level(f6)| in dB")
    psimd3_asym: float = Field(..., ge=0, description="|level(f3) - level(f7)| in dB")

    def level(self, label: str) -> float:
        for component in self.components:
            if component.label == label:
                return component.level_db
        raise KeyError(label)

    def freq(self, label: str) -> float:
        for component in self.components:
            if component.label == label:
                return component.freq_hz
        raise KeyError(label)


class AsymmetrySweepEntry(BaseModel):
    input_freq: float
    report: Optional[ImdReport] = None
    error: Optional[str] = None
    error_type: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.report is not None


# Experiment Models
class SweepConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    hidden_benn: List[int] = Field(default_factory=lambda: list(range(10, 111, 10)))
    hidden_ewnn: List[int] = Field(default_factory=lambda: list(range(10, 61, 5)))
    frequencies: List[float] = Field(default_factory=lambda: [float(f) for f in range(1900, 4301, 100)])
    target_sse: float = Field(0.1, gt=0, description="SSE level read out of the hidden-size curves")
    compare_max_iterations: int = Field(40, ge=1, description="N_max used by the model comparison")

    @field_validator("hidden_benn", "hidden_ewnn", "frequencies")
    @classmethod
    def validate_nonempty(cls, v: List[Any]) -> List[Any]:
        if not v:
            raise ValueError("Sweep ranges must not be empty")
        return v


class DataConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    trace_file: Optional[str] = Field(None, description="CSV of stored traces; simulated on demand when unset")


class OutputConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    directory: Optional[str] = Field(None, description="Output directory; settings default when unset")


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    circuit: CircuitConfig = Field(default_factory=CircuitConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    laguerre: LaguerreConfig = Field(default_factory=LaguerreConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    data: DataConfig = Field(default_factory=DataConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)


class ModelComparison(BaseModel):
    model: str
    sse: Optional[float] = None
    max_time_error: Optional[float] = None
    spectrum_error_db: Dict[str, float] = Field(default_factory=dict)
    parameter_count: Optional[int] = None
    iterations: Optional[int] = None
    error: Optional[str] = None


class ComparisonReport(BaseModel):
    measured: ImdReport
    models: List[ModelComparison] = Field(..., min_length=3, max_length=3)

    def get(self, model: str) -> ModelComparison:
        for entry in self.models:
            if entry.model == model:
                return entry
        raise KeyError(model)
