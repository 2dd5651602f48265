from .activations import morlet, morlet_deriv, normalize_hidden, sigmoid, sigmoid_deriv
from .elman import (
    ElmanState,
    WaveletParams,
    benn_forward,
    benn_grad_step,
    ewnn_forward,
    ewnn_grad_step,
    model_from_document,
    model_to_document,
    parameter_count,
)
from .volterra import FitResult, fit_volterra_laguerre, laguerre_bank, laguerre_regressor_terms, volterra_predict
