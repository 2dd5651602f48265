from typing import Union

import numpy as np
from scipy.special import expit

ArrayLike = Union[float, np.ndarray]

# Modulation frequency of the cosine-modulated Gaussian
MORLET_OMEGA = 1.75


def sigmoid(x: ArrayLike) -> ArrayLike:
    """Logistic function 1/(1+exp(-x))"""
    return expit(x)


def sigmoid_deriv(x: ArrayLike) -> ArrayLike:
    """f'(x) = f(x)(1 - f(x))"""
    f = expit(x)
    return f * (1.0 - f)


def morlet(z: ArrayLike) -> ArrayLike:
    """cos(1.75 z) exp(-z^2/2)"""
    return np.cos(MORLET_OMEGA * z) * np.exp(-0.5 * np.square(z))


def morlet_deriv(z: ArrayLike) -> ArrayLike:
    """Derivative of morlet"""
    envelope = np.exp(-0.5 * np.square(z))
    return -MORLET_OMEGA * np.sin(MORLET_OMEGA * z) * envelope - z * np.cos(MORLET_OMEGA * z) * envelope


def normalize_hidden(z_raw: np.ndarray) -> np.ndarray:
    """Scale by the largest magnitude; the zero vector is returned unchanged"""
    z_raw = np.asarray(z_raw, dtype=float)
    peak = normalization_scale(z_raw)
    if peak == 0.0:
        return z_raw.copy()
    return z_raw / peak


def normalization_scale(z_raw: np.ndarray) -> float:
    """Denominator used by normalize_hidden"""
    if z_raw.size == 0:
        return 0.0
    return float(np.max(np.abs(z_raw)))
