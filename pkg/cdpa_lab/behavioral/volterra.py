"""
Volterra series projected on discrete Laguerre functions.

The input is passed through a cascade of Laguerre filters sharing one pole; the
model output is a polynomial (degrees 1..P, no constant) in the stage outputs
whose coefficients are found by linear least squares.
"""
import logging
import math
from itertools import combinations_with_replacement, product
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field
from scipy import linalg, signal

from ..exceptions import InvalidArgumentError
from ..models import LaguerreConfig, SignalTrace

logger = logging.getLogger(__name__)

TraceLike = Union[SignalTrace, np.ndarray, Sequence[float]]


class FitResult(BaseModel):
    """Least-squares Volterra-Laguerre fit"""
    coefficients: List[float] = Field(..., description="One coefficient per regressor term")
    parameter_count: int = Field(..., ge=1)
    rank: int = Field(..., ge=0, description="Numerical rank of the regressor matrix")
    rank_deficient: bool = Field(False, description="Minimum-norm solution of a rank-deficient system")
    residual_sse: float = Field(..., ge=0, description="1/2 * sum of squared residuals on the fit data")
    laguerre: LaguerreConfig


def _values(x: TraceLike) -> np.ndarray:
    if isinstance(x, SignalTrace):
        return x.values
    return np.asarray(x, dtype=float)


def laguerre_bank(x: TraceLike, cfg: LaguerreConfig) -> np.ndarray:
    """
    Filter x through the Laguerre cascade.

    Returns:
        Array of shape (K, n); row k is the output of stage k
    """
    if not abs(cfg.pole) < 1.0:
        raise InvalidArgumentError(f"Laguerre pole must satisfy |pole| < 1, got {cfg.pole}")
    values = _values(x)
    lam = cfg.pole

    stages = np.empty((cfg.num_basis, values.size))
    stage = signal.lfilter([math.sqrt(1.0 - lam * lam)], [1.0, -lam], values)
    stages[0] = stage
    for k in range(1, cfg.num_basis):
        stage = signal.lfilter([-lam, 1.0], [1.0, -lam], stage)
        stages[k] = stage
    return stages


def laguerre_regressor_terms(cfg: LaguerreConfig) -> List[Tuple[int, ...]]:
    """Stage-index tuples of every regressor, ordered by degree"""
    terms: List[Tuple[int, ...]] = []
    for degree in range(1, cfg.max_order + 1):
        if cfg.symmetric_kernels:
            terms.extend(combinations_with_replacement(range(cfg.num_basis), degree))
        else:
            terms.extend(product(range(cfg.num_basis), repeat=degree))
    return terms


def regressor_matrix(x: TraceLike, cfg: LaguerreConfig) -> np.ndarray:
    stages = laguerre_bank(x, cfg)
    terms = laguerre_regressor_terms(cfg)
    phi = np.empty((stages.shape[1], len(terms)))
    for col, term in enumerate(terms):
        phi[:, col] = np.prod(stages[list(term)], axis=0)
    return phi


def fit_volterra_laguerre(x: TraceLike, y: TraceLike, cfg: LaguerreConfig) -> FitResult:
    """
    Least-squares identification of the Volterra-Laguerre coefficients.

    Rank-deficient regressor matrices are solved in the minimum-norm sense and
    flagged on the result.
    """
    x_values = _values(x)
    y_values = _values(y)
    if x_values.shape != y_values.shape:
        raise InvalidArgumentError("Input and output traces must have equal length")

    phi = regressor_matrix(x_values, cfg)
    count = phi.shape[1]
    if x_values.size < count:
        raise InvalidArgumentError(f"Need at least {count} samples to fit {count} coefficients, got {x_values.size}")

    logger.info(f"Fitting Volterra-Laguerre model with {count} regressors on {x_values.size} samples")
    coefficients, _, rank, _ = linalg.lstsq(phi, y_values, lapack_driver="gelsd")
    rank_deficient = int(rank) < count
    if rank_deficient:
        logger.warning(f"⚠️ Regressor matrix rank {rank} < {count}; using minimum-norm solution")

    residual = y_values - phi @ coefficients
    return FitResult(
        coefficients=coefficients.tolist(),
        parameter_count=count,
        rank=int(rank),
        rank_deficient=rank_deficient,
        residual_sse=0.5 * float(residual @ residual),
        laguerre=cfg,
    )


def volterra_predict(coeffs: Union[FitResult, Sequence[float], np.ndarray], x: TraceLike,
                     cfg: LaguerreConfig) -> SignalTrace:
    """Evaluate the fitted polynomial on the Laguerre stages of x"""
    c = np.asarray(coeffs.coefficients if isinstance(coeffs, FitResult) else coeffs, dtype=float)
    phi = regressor_matrix(x, cfg)
    if c.shape != (phi.shape[1],):
        raise InvalidArgumentError(f"Expected {phi.shape[1]} coefficients, got {c.size}")

    sample_rate, start_time = (x.sample_rate, x.start_time) if isinstance(x, SignalTrace) else (1.0, 0.0)
    return SignalTrace.from_array(phi @ c, sample_rate, start_time)
