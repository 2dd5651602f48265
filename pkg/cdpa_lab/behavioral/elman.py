"""
Elman recurrent networks with sigmoid (BENN) and Morlet wavelet (EWNN) hidden layers.

Shapes follow the usual Elman notation: W1 is L x M (hidden -> output), W2 is
N x L (input -> hidden) and W3 is L x L (context -> hidden). The context holds
alpha * H from the previous call. Gradient steps are plain gradient descent
with the diagonal W3_ii recursion for the partials of H with respect to W2 and
W3; the recursion memories live on the state.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..exceptions import InvalidArgumentError, TrainingDivergedError
from ..models import ModelDocument, ModelKind
from .activations import morlet, morlet_deriv, normalization_scale, sigmoid

logger = logging.getLogger(__name__)

# Lower bound on |a_i| while scale factors are trained
MIN_SCALE = 0.1


class ElmanState:
    """Weights, context activations and gradient-recursion memory of an Elman network"""

    def __init__(self, W1: np.ndarray, W2: np.ndarray, W3: np.ndarray, alpha: float,
                 context: Optional[np.ndarray] = None):
        self.W1 = np.array(W1, dtype=float)
        self.W2 = np.array(W2, dtype=float)
        self.W3 = np.array(W3, dtype=float)
        self.alpha = float(alpha)

        hidden = self.W1.shape[0] if self.W1.ndim else 0
        if self.W1.ndim != 2 or self.W2.ndim != 2 or self.W2.shape[1] != hidden or self.W3.shape != (hidden, hidden):
            raise InvalidArgumentError(
                f"Inconsistent weight shapes W1={self.W1.shape}, W2={self.W2.shape}, W3={self.W3.shape}"
            )

        self.context = np.zeros(hidden) if context is None else np.array(context, dtype=float)
        if self.context.shape != (hidden,):
            raise InvalidArgumentError(f"Context must have length {hidden}, got {self.context.shape}")
        self.dH_dW2 = np.zeros_like(self.W2)
        self.dH_dW3 = np.zeros_like(self.W3)

    @classmethod
    def zeros(cls, input_size: int, hidden_count: int, output_size: int, alpha: float) -> "ElmanState":
        return cls(
            W1=np.zeros((hidden_count, output_size)),
            W2=np.zeros((input_size, hidden_count)),
            W3=np.zeros((hidden_count, hidden_count)),
            alpha=alpha,
        )

    @property
    def input_size(self) -> int:
        return self.W2.shape[0]

    @property
    def hidden_count(self) -> int:
        return self.W1.shape[0]

    @property
    def output_size(self) -> int:
        return self.W1.shape[1]

    def copy(self) -> "ElmanState":
        clone = ElmanState(self.W1, self.W2, self.W3, self.alpha, self.context)
        clone.dH_dW2 = self.dH_dW2.copy()
        clone.dH_dW3 = self.dH_dW3.copy()
        return clone


class WaveletParams:
    """Per-neuron scale (a) and translation (b) factors of the Morlet hidden layer"""

    def __init__(self, a: np.ndarray, b: np.ndarray, update_enabled: bool = False):
        self.a = np.array(a, dtype=float)
        self.b = np.array(b, dtype=float)
        self.update_enabled = bool(update_enabled)
        if self.a.shape != self.b.shape:
            raise InvalidArgumentError("Scale and translation vectors must have equal length")
        if not self.update_enabled and not np.all(self.a == 1.0):
            raise InvalidArgumentError("Frozen wavelet parameters require a == 1")
        if self.update_enabled:
            self.a = clamp_scale(self.a)
        self.dH_da = np.zeros_like(self.a)
        self.dH_db = np.zeros_like(self.b)

    @classmethod
    def initial(cls, hidden_count: int, rng: np.random.Generator, update_enabled: bool = False) -> "WaveletParams":
        """Unit scales and standard-normal translations drawn from rng"""
        return cls(a=np.ones(hidden_count), b=rng.standard_normal(hidden_count), update_enabled=update_enabled)

    def copy(self) -> "WaveletParams":
        clone = WaveletParams(self.a, self.b, self.update_enabled)
        clone.dH_da = self.dH_da.copy()
        clone.dH_db = self.dH_db.copy()
        return clone


def clamp_scale(a: np.ndarray) -> np.ndarray:
    """Keep |a_i| >= MIN_SCALE, preserving sign (zero maps to +MIN_SCALE)"""
    sign = np.where(a < 0, -1.0, 1.0)
    return sign * np.maximum(np.abs(a), MIN_SCALE)


@dataclass
class ForwardPass:
    """Quantities of one forward evaluation reused by the gradient step"""
    y: np.ndarray
    H: np.ndarray
    h: np.ndarray
    context: np.ndarray
    chain: np.ndarray  # dH_i/dh_i
    z: Optional[np.ndarray] = None
    scale: float = 1.0


def _check_vector(name: str, v: np.ndarray, size: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (size,):
        raise InvalidArgumentError(f"{name} must have shape ({size},), got {v.shape}")
    return v


def _pre_activation(state: ElmanState, u: np.ndarray) -> np.ndarray:
    return state.W2.T @ u + state.W3.T @ state.context


def benn_pass(state: ElmanState, u: np.ndarray) -> ForwardPass:
    """Evaluate the sigmoid network without advancing the context"""
    u = _check_vector("u", u, state.input_size)
    h = _pre_activation(state, u)
    H = sigmoid(h)
    y = state.W1.T @ H
    return ForwardPass(y=y, H=H, h=h, context=state.context.copy(), chain=H * (1.0 - H))


def ewnn_pass(state: ElmanState, wp: WaveletParams, u: np.ndarray) -> ForwardPass:
    """Evaluate the wavelet network without advancing the context"""
    u = _check_vector("u", u, state.input_size)
    if wp.a.shape != (state.hidden_count,):
        raise InvalidArgumentError(f"Wavelet parameters must have length {state.hidden_count}")
    h = _pre_activation(state, u)
    z_raw = (h - wp.b) / wp.a
    scale = normalization_scale(z_raw)
    # The normalizer is held constant under differentiation
    divisor = scale if scale > 0.0 else 1.0
    z = z_raw / divisor
    H = morlet(z)
    y = state.W1.T @ H
    chain = morlet_deriv(z) / (wp.a * divisor)
    return ForwardPass(y=y, H=H, h=h, context=state.context.copy(), chain=chain, z=z, scale=divisor)


def benn_forward(state: ElmanState, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Output and hidden activations; the context becomes alpha * H"""
    fp = benn_pass(state, u)
    state.context = state.alpha * fp.H
    return fp.y, fp.H


def ewnn_forward(state: ElmanState, wp: WaveletParams, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Output, hidden activations and normalized wavelet arguments; the context becomes alpha * H"""
    fp = ewnn_pass(state, wp, u)
    state.context = state.alpha * fp.H
    return fp.y, fp.H, fp.z


def _error(y_d: np.ndarray, y: np.ndarray, iteration: int) -> Tuple[np.ndarray, float]:
    delta_o = y_d - y
    error = 0.5 * float(delta_o @ delta_o)
    if not np.isfinite(error):
        raise TrainingDivergedError(iteration)
    return delta_o, error


def _apply_weight_gradients(state: ElmanState, fp: ForwardPass, u: np.ndarray, delta_o: np.ndarray,
                            eta1: float, eta2: float, eta3: float, iteration: int) -> np.ndarray:
    alpha = state.alpha
    delta_h = state.W1 @ delta_o
    w3_diag = np.diag(state.W3)

    mem_w2 = fp.chain[None, :] * (u[:, None] + alpha * w3_diag[None, :] * state.dH_dW2)
    mem_w3 = fp.chain[None, :] * (fp.context[:, None] + alpha * w3_diag[None, :] * state.dH_dW3)

    delta_w1 = eta1 * np.outer(fp.H, delta_o)
    delta_w2 = eta2 * delta_h[None, :] * mem_w2
    delta_w3 = eta3 * delta_h[None, :] * mem_w3

    if not all(np.all(np.isfinite(d)) for d in (delta_w1, delta_w2, delta_w3)):
        raise TrainingDivergedError(iteration, f"Non-finite weight gradient at iteration {iteration}")

    state.W1 += delta_w1
    state.W2 += delta_w2
    state.W3 += delta_w3
    state.dH_dW2 = mem_w2
    state.dH_dW3 = mem_w3
    state.context = alpha * fp.H
    return delta_h


def benn_grad_step(state: ElmanState, u: np.ndarray, y_d: np.ndarray,
                   eta1: float = 0.01, eta2: float = 0.01, eta3: float = 0.01,
                   forward: Optional[ForwardPass] = None, iteration: int = 0) -> Tuple[ElmanState, float]:
    """
    One gradient-descent update of a sigmoid Elman network.

    The state is updated in place. E(p) is measured with the weights in effect
    before the update.

    Returns:
        Tuple of (state, E(p))
    """
    u = _check_vector("u", u, state.input_size)
    y_d = _check_vector("y_d", y_d, state.output_size)
    fp = forward if forward is not None else benn_pass(state, u)
    delta_o, error = _error(y_d, fp.y, iteration)
    _apply_weight_gradients(state, fp, u, delta_o, eta1, eta2, eta3, iteration)
    return state, error


def ewnn_grad_step(state: ElmanState, wp: WaveletParams, u: np.ndarray, y_d: np.ndarray,
                   eta1: float = 0.01, eta2: float = 0.01, eta3: float = 0.01,
                   eta4: float = 0.01, eta5: float = 0.01,
                   forward: Optional[ForwardPass] = None,
                   iteration: int = 0) -> Tuple[ElmanState, WaveletParams, float]:
    """
    One gradient-descent update of a wavelet Elman network.

    Scale and translation factors move only when wp.update_enabled; their
    recursions mirror the weight recursions and |a_i| is re-clamped afterwards.

    Returns:
        Tuple of (state, wavelet params, E(p))
    """
    u = _check_vector("u", u, state.input_size)
    y_d = _check_vector("y_d", y_d, state.output_size)
    fp = forward if forward is not None else ewnn_pass(state, wp, u)
    delta_o, error = _error(y_d, fp.y, iteration)

    w3_diag = np.diag(state.W3).copy()
    delta_h = _apply_weight_gradients(state, fp, u, delta_o, eta1, eta2, eta3, iteration)

    if wp.update_enabled:
        dpsi = morlet_deriv(fp.z)
        alpha = state.alpha
        dH_da = dpsi * (-fp.z / wp.a + alpha * w3_diag * wp.dH_da)
        # The translation partial leaves out the normalizer
        dH_db = dpsi * (-1.0 / wp.a + alpha * w3_diag * wp.dH_db)
        delta_a = eta4 * delta_h * dH_da
        delta_b = eta5 * delta_h * dH_db
        if not (np.all(np.isfinite(delta_a)) and np.all(np.isfinite(delta_b))):
            raise TrainingDivergedError(iteration, f"Non-finite wavelet gradient at iteration {iteration}")
        wp.a = clamp_scale(wp.a + delta_a)
        wp.b = wp.b + delta_b
        wp.dH_da = dH_da
        wp.dH_db = dH_db

    return state, wp, error


def parameter_count(state: ElmanState, wp: Optional[WaveletParams] = None) -> int:
    """Number of trainable values: all weights, plus a and b for wavelet networks"""
    count = state.W1.size + state.W2.size + state.W3.size
    if wp is not None:
        count += wp.a.size + wp.b.size
    return int(count)


def model_to_document(state: ElmanState, kind: ModelKind, seed: int,
                      wp: Optional[WaveletParams] = None, input_scale: float = 1.0) -> ModelDocument:
    """Row-major JSON-ready snapshot of a network"""
    return ModelDocument(
        model_kind=kind,
        input_size=state.input_size,
        hidden_count=state.hidden_count,
        output_size=state.output_size,
        alpha=state.alpha,
        seed=seed,
        W1=state.W1.ravel(order="C").tolist(),
        W2=state.W2.ravel(order="C").tolist(),
        W3=state.W3.ravel(order="C").tolist(),
        a=wp.a.tolist() if wp is not None else None,
        b=wp.b.tolist() if wp is not None else None,
        context=state.context.tolist(),
        wavelet_updates=wp.update_enabled if wp is not None else False,
        input_scale=input_scale,
    )


def model_from_document(doc: ModelDocument) -> Tuple[ElmanState, Optional[WaveletParams]]:
    """Rebuild a network with its stored context and zero recursion memory"""
    n, l, m = doc.input_size, doc.hidden_count, doc.output_size
    try:
        state = ElmanState(
            W1=np.array(doc.W1, dtype=float).reshape(l, m),
            W2=np.array(doc.W2, dtype=float).reshape(n, l),
            W3=np.array(doc.W3, dtype=float).reshape(l, l),
            alpha=doc.alpha,
            context=doc.context,
        )
    except ValueError as e:
        raise InvalidArgumentError(f"Model document dimensions do not match its weights: {e}") from e

    wp = None
    if doc.model_kind.is_wavelet:
        if doc.a is None or doc.b is None:
            raise InvalidArgumentError("Wavelet model document lacks a/b")
        wp = WaveletParams(a=doc.a, b=doc.b, update_enabled=doc.wavelet_updates)
    return state, wp
