"""Two-state bursty channel simulator for synthetic outcome traces.

A good/bad Markov chain emits one binary outcome per step with a
state-dependent delivery probability. Runs start from the stationary state
distribution and are bit-for-bit reproducible from (params, seed).
"""

from dataclasses import dataclass, replace

import numpy as np

from .data import DEFAULT_SAMPLE_PERIOD_S, OutcomeSeries


@dataclass(frozen=True)
class GilbertElliottParams:
    p_good_to_bad: float
    p_bad_to_good: float
    success_prob_good: float
    success_prob_bad: float
    seed: int = 0

    def __post_init__(self):
        probs = {
            "p_good_to_bad": self.p_good_to_bad,
            "p_bad_to_good": self.p_bad_to_good,
            "success_prob_good": self.success_prob_good,
            "success_prob_bad": self.success_prob_bad,
        }
        for name, p in probs.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {p}")
        if self.p_good_to_bad + self.p_bad_to_good <= 0.0:
            raise ValueError(
                "chain is reducible: p_good_to_bad + p_bad_to_good must be > 0"
            )


# Bursty reference calibration: mostly-good link with rare long bad spells,
# long-run delivery ratio 0.884. The preset ids are part of the CLI contract.
PRESETS = {
    "paper-like": GilbertElliottParams(
        p_good_to_bad=0.01,
        p_bad_to_good=0.09,
        success_prob_good=0.97,
        success_prob_bad=0.11,
    ),
}


def preset_params(name, seed=None):
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown channel preset {name!r} (known: {known})")
    params = PRESETS[name]
    if seed is not None:
        params = replace(params, seed=seed)
    return params


def stationary_fdr(params):
    """Long-run delivery ratio: pi_good * s_good + pi_bad * s_bad."""
    denom = params.p_good_to_bad + params.p_bad_to_good
    pi_good = params.p_bad_to_good / denom
    return pi_good * params.success_prob_good + (1.0 - pi_good) * params.success_prob_bad


def simulate(params, n, seed=None, sample_period_s=DEFAULT_SAMPLE_PERIOD_S):
    """Generate n outcomes; deterministic given (params, seed).

    The generator is PCG64 and the draw order is fixed: one uniform picks
    the initial state against the stationary distribution, then n uniforms
    are drawn for transitions and n for emissions. Each step emits first
    (success if the emission uniform is below the state's delivery
    probability) and then transitions. Changing this order would silently
    invalidate recorded traces, so treat it as part of the format.
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if seed is None:
        seed = params.seed
    rng = np.random.Generator(np.random.PCG64(seed))
    pi_good = params.p_bad_to_good / (params.p_good_to_bad + params.p_bad_to_good)
    good = rng.random() < pi_good
    u_trans = rng.random(n).tolist()
    u_emit = rng.random(n).tolist()
    p_gb = params.p_good_to_bad
    p_bg = params.p_bad_to_good
    s_g = params.success_prob_good
    s_b = params.success_prob_bad
    out = bytearray(n)
    for t in range(n):
        if good:
            out[t] = u_emit[t] < s_g
            good = not (u_trans[t] < p_gb)
        else:
            out[t] = u_emit[t] < s_b
            good = u_trans[t] < p_bg
    outcomes = np.frombuffer(bytes(out), dtype=np.uint8)
    label = f"ge(p_gb={p_gb},p_bg={p_bg},s_g={s_g},s_b={s_b},seed={seed})"
    return OutcomeSeries(outcomes, sample_period_s=sample_period_s, origin_label=label)
