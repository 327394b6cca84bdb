"""Bob/Eve Eb/N0 thresholds, security gap, and BER-versus-gap sweeps."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from . import analytic

DEFAULT_PE_B = 1e-5
DEFAULT_PE_E = 0.4
BISECT_TOL_DB = 1e-10


class OutOfRangeError(ValueError):
    pass


class NonMonotonicError(ValueError):
    pass


class AnalyticCurve:
    """BER as a closed-form function of Eb/N0 (dB) over ``domain``."""

    def __init__(self, fn: Callable[[float], float], domain=(-10.0, 20.0), scheme: str = ""):
        self.fn = fn
        self.domain = (float(domain[0]), float(domain[1]))
        self.scheme = scheme

    def __call__(self, ebn0_db: float) -> float:
        lo, hi = self.domain
        if not lo <= ebn0_db <= hi:
            raise OutOfRangeError(f"{ebn0_db:.4f} dB outside curve domain [{lo}, {hi}]")
        return self.fn(ebn0_db)


@dataclass(frozen=True)
class CurvePoint:
    ebn0_db: float
    ber: float
    frame_errors: int | None = None


class SimulatedCurve:
    """Measured points; zero-error points are dropped (their BER is unresolved)."""

    def __init__(self, points: Sequence[CurvePoint], scheme: str = ""):
        self.scheme = scheme
        resolved = sorted((p for p in points if p.ber > 0), key=lambda p: p.ebn0_db)
        if len(resolved) < 2:
            raise ValueError(
                f"curve {scheme or '<unnamed>'} needs at least 2 points with recorded errors, got {len(resolved)}"
            )
        self.points = resolved
        self._check_monotone()

    @property
    def domain(self) -> tuple[float, float]:
        return self.points[0].ebn0_db, self.points[-1].ebn0_db

    def _sigma(self, p: CurvePoint) -> float:
        # error counts are driven by the number of erred frames
        if not p.frame_errors:
            return 0.0
        return p.ber / math.sqrt(p.frame_errors)

    def _check_monotone(self):
        for a, b in zip(self.points, self.points[1:]):
            slack = 2.0 * math.hypot(self._sigma(a), self._sigma(b))
            if b.ber > a.ber + slack:
                raise NonMonotonicError(
                    f"BER rises from {a.ber:.3e} at {a.ebn0_db} dB to {b.ber:.3e} at {b.ebn0_db} dB "
                    f"beyond 2-sigma slack {slack:.3e}"
                )

    def __call__(self, ebn0_db: float) -> float:
        pts = self.points
        lo, hi = self.domain
        if not lo <= ebn0_db <= hi:
            raise OutOfRangeError(f"{ebn0_db:.4f} dB outside simulated range [{lo}, {hi}]")
        for a, b in zip(pts, pts[1:]):
            if a.ebn0_db <= ebn0_db <= b.ebn0_db:
                if ebn0_db == a.ebn0_db:
                    return a.ber
                frac = (ebn0_db - a.ebn0_db) / (b.ebn0_db - a.ebn0_db)
                return 10.0 ** (math.log10(a.ber) + frac * (math.log10(b.ber) - math.log10(a.ber)))
        return pts[-1].ber


def analytic_curve(scheme: str, *, k: int, n: int | None = None, t: int | None = None,
                   w: int | str = analytic.PERFECT, domain=(-10.0, 20.0)) -> AnalyticCurve:
    label = analytic.curve_point(scheme, domain[0], k=k, n=n, t=t, w=w).scheme
    return AnalyticCurve(
        lambda x: analytic.curve_point(scheme, x, k=k, n=n, t=t, w=w).p_e, domain, label
    )


def invert_ber(curve, target_pe: float) -> float:
    """Smallest Eb/N0 (dB) at which the curve's BER is at most ``target_pe``."""
    if isinstance(curve, SimulatedCurve):
        return _invert_simulated(curve, target_pe)
    lo, hi = curve.domain
    f_lo, f_hi = curve(lo), curve(hi)
    if f_lo <= target_pe:
        if f_lo == target_pe:
            return lo
        raise OutOfRangeError(f"target {target_pe:.3e} above the curve maximum {f_lo:.3e} at {lo} dB")
    if f_hi > target_pe:
        raise OutOfRangeError(f"target {target_pe:.3e} below the curve minimum {f_hi:.3e} at {hi} dB")
    while hi - lo > BISECT_TOL_DB:
        mid = 0.5 * (lo + hi)
        if curve(mid) <= target_pe:
            hi = mid
        else:
            lo = mid
    return hi


def _invert_simulated(curve: SimulatedCurve, target_pe: float) -> float:
    pts = curve.points
    bers = [p.ber for p in pts]
    for j, p in enumerate(pts):
        if p.ber <= target_pe:
            break
    else:
        raise OutOfRangeError(
            f"target {target_pe:.3e} below the lowest resolved BER {min(bers):.3e} "
            f"(achieved range {min(bers):.3e}..{max(bers):.3e})"
        )
    if j == 0:
        if p.ber == target_pe:
            return p.ebn0_db
        raise OutOfRangeError(
            f"target {target_pe:.3e} above the first resolved BER {p.ber:.3e} "
            f"(achieved range {min(bers):.3e}..{max(bers):.3e})"
        )
    a, b = pts[j - 1], pts[j]
    la, lb, lt = math.log10(a.ber), math.log10(b.ber), math.log10(target_pe)
    return a.ebn0_db + (lt - la) / (lb - la) * (b.ebn0_db - a.ebn0_db)


@dataclass(frozen=True)
class GapResult:
    pe_b_target: float
    pe_e_target: float
    ebn0_b_db: float
    ebn0_e_db: float

    @property
    def gap_db(self) -> float:
        return self.ebn0_b_db - self.ebn0_e_db


def security_gap(curve, pe_b_target: float = DEFAULT_PE_B, pe_e_target: float = DEFAULT_PE_E) -> GapResult:
    if pe_b_target > pe_e_target:
        raise ValueError(f"Bob's target {pe_b_target} must not exceed Eve's target {pe_e_target}")
    return GapResult(pe_b_target, pe_e_target, invert_ber(curve, pe_b_target), invert_ber(curve, pe_e_target))


def ber_vs_gap(curve, pe_b_target: float, gap_grid: Sequence[float]) -> list[tuple[float, float]]:
    """Eve's BER at ``Eb/N0|B - gap`` for each gap; ``nan`` where the curve has no data."""
    ebn0_b = invert_ber(curve, pe_b_target)
    out = []
    for g in gap_grid:
        try:
            out.append((float(g), float(curve(ebn0_b - g))))
        except OutOfRangeError:
            out.append((float(g), math.nan))
    return out
