"""Closed-form BER/FER for unitary-rate and t-error-correcting transmission,
with and without scrambling.

``erfc`` comes from scipy (Cephes; relative error near machine precision on
the ranges used here). Binomial tails are summed in the log domain with
``lgamma`` terms and compensated summation, since C(2047, i) overflows doubles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, gammaln

from .channel import db_to_linear

PERFECT = "perfect"


@dataclass(frozen=True)
class AnalyticPoint:
    ebn0_db: float
    p_e: float
    p_f: float
    p_r: float
    scheme: str = ""


def bpsk_ber(ebn0_db: float, rate: float = 1.0) -> float:
    """0.5*erfc(sqrt(rate*Eb/N0)): raw hard-decision error probability."""
    return float(0.5 * erfc(math.sqrt(rate * db_to_linear(ebn0_db))))


def frame_error(p_e: float, k: int) -> float:
    """1 - (1 - p_e)^k without cancellation for tiny p_e."""
    if p_e >= 1.0:
        return 1.0
    return float(-math.expm1(k * math.log1p(-p_e)))


def _conditional(p_e: float, p_f: float) -> float:
    return p_e / p_f if p_f > 0 else 0.0


def unitary_unscrambled(ebn0_db: float, k: int) -> AnalyticPoint:
    if k < 1:
        raise ValueError("k must be positive")
    p_e = bpsk_ber(ebn0_db)
    p_f = frame_error(p_e, k)
    return AnalyticPoint(ebn0_db, p_e, p_f, _conditional(p_e, p_f), "unitary")


def unitary_perfect_scrambling(ebn0_db: float, k: int) -> AnalyticPoint:
    base = unitary_unscrambled(ebn0_db, k)
    return AnalyticPoint(ebn0_db, 0.5 * base.p_f, base.p_f, 0.5, "unitary_perfect")


def scrambled_ber(p_f, p_r, w):
    """Descrambled BER of a bit whose S^-1 column has weight ``w``.

    Inside an erred frame each of the ``w`` contributing bits is wrong with
    probability ``p_r``; the output bit is wrong when an odd number are.
    ``w`` may be an array of per-column weights.
    """
    w = np.asarray(w)
    if np.any(w < 1):
        raise ValueError("column weight must be at least 1")
    if not 0.0 <= p_r <= 1.0:
        raise ValueError(f"p_r must be a probability, got {p_r}")
    if p_r < 0.5:
        # 1 - (1-2p)^w without cancellation when p is small
        odd = -np.expm1(w * math.log1p(-2.0 * p_r))
    else:
        odd = 1.0 - (1.0 - 2.0 * p_r) ** w
    out = p_f * odd / 2.0
    return float(out) if out.ndim == 0 else out


def average_scrambled_ber(p_f: float, p_r: float, weights) -> float:
    return float(np.mean(scrambled_ber(p_f, p_r, np.asarray(weights))))


def binomial_tail(n: int, p: float, start: int, weighted: bool = False) -> float:
    """sum_{i=start}^{n} [i/n] C(n,i) p^i (1-p)^(n-i) in the log domain.

    With ``weighted`` each term carries the factor i/n (expected fraction of
    erred positions).
    """
    start = max(start, 0)
    if start > n:
        return 0.0
    if p <= 0.0:
        return 1.0 if start == 0 and not weighted else 0.0
    if p >= 1.0:
        return 1.0
    i = np.arange(start, n + 1, dtype=np.float64)
    logs = (
        gammaln(n + 1.0) - gammaln(i + 1.0) - gammaln(n - i + 1.0)
        + i * math.log(p) + (n - i) * math.log1p(-p)
    )
    if weighted:
        with np.errstate(divide="ignore"):
            logs = logs + np.log(i / n)
    top = float(np.max(logs))
    if top == -math.inf:
        return 0.0
    return min(1.0, math.exp(top) * math.fsum(np.exp(logs - top)))


def channel_error(ebn0_db: float, n: int, k: int) -> float:
    """Raw channel BER including the k/n bandwidth expansion."""
    return bpsk_ber(ebn0_db, k / n)


def t_error_code(ebn0_db: float, n: int, k: int, t: int) -> AnalyticPoint:
    if not n >= k >= 1:
        raise ValueError(f"need n >= k >= 1, got n={n}, k={k}")
    if not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n, got t={t}")
    p0 = channel_error(ebn0_db, n, k)
    p_f = binomial_tail(n, p0, t + 1)
    p_e = binomial_tail(n, p0, t + 1, weighted=True)
    return AnalyticPoint(ebn0_db, p_e, p_f, _conditional(p_e, p_f), "bch_model")


def t_error_perfect_scrambling(ebn0_db: float, n: int, k: int, t: int) -> float:
    return 0.5 * t_error_code(ebn0_db, n, k, t).p_f


def unitary_scrambled(ebn0_db: float, k: int, w) -> float:
    base = unitary_unscrambled(ebn0_db, k)
    return scrambled_ber(base.p_f, base.p_r, w)


def t_error_scrambled(ebn0_db: float, n: int, k: int, t: int, w) -> float:
    base = t_error_code(ebn0_db, n, k, t)
    return scrambled_ber(base.p_f, base.p_r, w)


def curve_point(scheme: str, ebn0_db: float, *, k: int, n: int | None = None,
                t: int | None = None, w: int | str = PERFECT) -> AnalyticPoint:
    """One (BER, FER) point for ``scheme`` in {unitary, bch_model} and scrambling ``w``.

    ``w`` is a column weight of S^-1 (``1`` means no scrambling) or ``"perfect"``.
    """
    if scheme == "unitary":
        base = unitary_unscrambled(ebn0_db, k)
    elif scheme == "bch_model":
        base = t_error_code(ebn0_db, n, k, t)
    else:
        raise ValueError(f"unknown analytic scheme {scheme!r}")
    if w == PERFECT:
        ber = 0.5 * base.p_f
    else:
        ber = scrambled_ber(base.p_f, base.p_r, int(w))
    label = f"{scheme}_{'perfect' if w == PERFECT else f'w{int(w)}'}"
    return AnalyticPoint(ebn0_db, ber, base.p_f, base.p_r, label)
