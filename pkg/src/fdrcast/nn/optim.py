"""Adam parameter updates.

State (first/second moment and step count) lives on the Parameter itself, so
one function call per parameter per step is the whole optimizer. Gradients
are left untouched; the caller decides when to zero them.
"""

import numpy as np

from ..errors import NumericError


def adam_step(param, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """Apply one bias-corrected Adam update to ``param`` in place."""
    if not np.isfinite(param.grad).all():
        raise NumericError("adam_step: gradient contains non-finite values")
    param.step_count += 1
    t = param.step_count
    param.adam_m = beta1 * param.adam_m + (1.0 - beta1) * param.grad
    param.adam_v = beta2 * param.adam_v + (1.0 - beta2) * param.grad ** 2
    m_hat = param.adam_m / (1.0 - beta1 ** t)
    v_hat = param.adam_v / (1.0 - beta2 ** t)
    param.value -= lr * m_hat / (np.sqrt(v_hat) + eps)


def adam_step_all(params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """adam_step over a parameter list, then zero every gradient."""
    for p in params:
        adam_step(p, lr, beta1=beta1, beta2=beta2, eps=eps)
    for p in params:
        p.zero_grad()
