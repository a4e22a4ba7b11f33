"""Link-level abstraction: SJNR, per-bit error, per-task error, diversity error."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable


@dataclass(frozen=True)
class LinkBudget:
    """Linear powers (watts) observed on one RB."""

    signal_w: float
    jamming_w: float
    noise_w: float

    def __post_init__(self):
        if not self.signal_w > 0:
            raise ValueError("signal_w must be > 0")
        if self.jamming_w < 0:
            raise ValueError("jamming_w must be >= 0")
        if not self.noise_w > 0:
            raise ValueError("noise_w must be > 0")


def sjnr(lb: LinkBudget) -> float:
    return lb.signal_w / (lb.jamming_w + lb.noise_w)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def q_function(x: float) -> float:
    """Gaussian tail probability P(Z > x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _qam_prefactor(k: int) -> tuple[float, float]:
    M = 2 ** k
    return (4.0 / k) * (1.0 - 1.0 / math.sqrt(M)), 3.0 / (M - 1)


def _awgn_ber(gamma: float, k: int) -> float:
    a, c = _qam_prefactor(k)
    return a * q_function(math.sqrt(c * gamma))


def _rayleigh_ber(gamma: float, k: int) -> float:
    # closed-form average of Q(sqrt(c*g)) over an exponential g with mean gamma
    a, c = _qam_prefactor(k)
    h = c * gamma / 2.0
    return a * 0.5 * (1.0 - math.sqrt(h / (1.0 + h)))


BER_MODELS: dict[str, Callable[[float, int], float]] = {
    "awgn": _awgn_ber,
    "rayleigh": _rayleigh_ber,
}


def bit_error_prob(gamma: float, bits_per_symbol: int = 4, model: str = "awgn") -> float:
    """Gray-coded square M-QAM bit error probability at linear SJNR ``gamma``.

    For 16-QAM over AWGN this is ``0.75 * Q(sqrt(gamma / 5))``. The result is
    clamped to [0, 0.5].
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be a positive linear ratio, got {gamma}")
    try:
        curve = BER_MODELS[model]
    except KeyError:
        raise ValueError(f"unknown BER model {model!r}; choose from {sorted(BER_MODELS)}") from None
    return min(max(curve(gamma, bits_per_symbol), 0.0), 0.5)


def task_error_prob(pe: float, bits: int) -> float:
    """Probability that at least one of ``bits`` independent bits is in error."""
    if pe <= 0.0:
        return 0.0
    if pe >= 1.0:
        return 1.0
    return -math.expm1(bits * math.log1p(-pe))


def td_error_prob(per_rb_errors: Iterable[float]) -> float:
    """Failure probability when every copy must fail; the empty product is 1."""
    p = 1.0
    for e in per_rb_errors:
        p *= e
    return p
