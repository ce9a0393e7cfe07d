"""Werner-state entanglement measures, closed forms, bounds, extrapolation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

Number = Fraction | float
ENTANGLEMENT_THRESHOLD = Fraction(1, 3)


class BoundStatus(str, Enum):
    SATISFIED = "satisfied"
    SATURATED = "saturated"
    VIOLATED = "violated"


@dataclass(frozen=True)
class WernerSummary:
    p: Number
    concurrence: Number
    eof: float
    entangled: bool
    bound_z: int | None = None
    bound_status: BoundStatus | None = None

    @property
    def bound_satisfied(self) -> bool | None:
        if self.bound_status is None:
            return None
        return self.bound_status is not BoundStatus.VIOLATED


@dataclass(frozen=True)
class GasClosedForms:
    corr_opposite: Fraction
    corr_same: Fraction | None  # undefined for N = 1
    p: Fraction


@dataclass(frozen=True)
class AndersonBound:
    corr_min: Fraction
    p_max: Fraction


@dataclass(frozen=True)
class FitResult:
    p_infinity: float
    p_infinity_err: float
    coefficients: tuple[float, float]
    l_min_used: int
    chi2_per_dof: float


def werner_p(corr: Number) -> Number:
    """Werner parameter p = -(4/3) <S_i.S_j>; exact on exact input."""
    if not -Fraction(3, 4) <= corr <= 0:
        raise ValueError(f"correlator {corr} outside [-3/4, 0]; no Werner p in [0, 1]")
    if isinstance(corr, Fraction):
        return -Fraction(4, 3) * corr
    return -4.0 * corr / 3.0


def _check_p(p: Number) -> None:
    if not 0 <= p <= 1:
        raise ValueError(f"Werner parameter {p} outside [0, 1]")


def entanglement_verdict(p: Number) -> bool:
    """Two spins in a Werner state are entangled iff p > 1/3 (strict)."""
    _check_p(p)
    return p > ENTANGLEMENT_THRESHOLD


def concurrence(p: Number) -> Number:
    _check_p(p)
    c = (3 * p - 1) / 2
    zero = Fraction(0) if isinstance(p, Fraction) else 0.0
    return max(zero, c)


def eof(p: Number) -> float:
    """Entanglement of formation of the Werner state, in bits.

    E = h((1 + sqrt(1 - C^2)) / 2) with C the concurrence and h the binary
    entropy; identically zero for p <= 1/3.
    """
    c = float(concurrence(p))
    if c == 0.0:
        return 0.0
    x = (1.0 + math.sqrt(1.0 - c * c)) / 2.0
    return _binary_entropy(x)


def _binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def gas_closed_forms(N: int) -> GasClosedForms:
    """Exact correlators and p for the all-pairings superposition of 2N spins."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    corr_opp = -Fraction(1, 4) - Fraction(1, 2 * N)
    p = Fraction(1, 3) + Fraction(2, 3 * N)
    corr_same = Fraction(1, 4) if N >= 2 else None
    return GasClosedForms(corr_opposite=corr_opp, corr_same=corr_same, p=p)


def anderson_bound(z: int) -> AndersonBound:
    """Lower bound on <S_i.S_j> for a spin with z equivalent partners."""
    if z < 1:
        raise ValueError(f"coordination z must be >= 1, got {z}")
    return AndersonBound(corr_min=-Fraction(1, 4) - Fraction(1, 2 * z),
                         p_max=Fraction(1, 3) + Fraction(2, 3 * z))


def check_bound(corr: Number, err: Number, z: int) -> BoundStatus:
    """Compare a correlator (with 1-sigma error) against the z-coordination bound."""
    if err < 0:
        raise ValueError("error must be nonnegative")
    corr_min = anderson_bound(z).corr_min
    if abs(corr - corr_min) <= 3 * err:
        return BoundStatus.SATURATED
    return BoundStatus.SATISFIED if corr > corr_min else BoundStatus.VIOLATED


def werner_summary(corr: Number, err: Number = 0, z: int | None = None) -> WernerSummary:
    """Bundle p, concurrence, EoF, the verdict, and an optional bound check."""
    p = werner_p(corr)
    status = check_bound(corr, err, z) if z is not None else None
    return WernerSummary(p=p, concurrence=concurrence(p), eof=eof(p),
                         entangled=entanglement_verdict(p),
                         bound_z=z, bound_status=status)


# ---------------------------------------------------------------------------
# finite-size extrapolation
# ---------------------------------------------------------------------------

def _weighted_fit(ls: np.ndarray, ps: np.ndarray, errs: np.ndarray):
    """WLS fit of p(L) = p_inf + a/L + b/L^2; returns (beta, cov, chi2, dof)."""
    x = 1.0 / ls
    design = np.column_stack([np.ones_like(x), x, x * x])
    w = 1.0 / errs
    beta, *_ = np.linalg.lstsq(design * w[:, None], ps * w, rcond=None)
    resid = (ps - design @ beta) * w
    chi2 = float(resid @ resid)
    cov = np.linalg.inv((design * (w * w)[:, None]).T @ design)
    return beta, cov, chi2, len(ls) - 3


def extrapolate(points: Sequence[tuple[float, float, float]],
                inflate_errors: bool = True) -> FitResult:
    """Extrapolate Werner-parameter data to infinite size via a 1/L expansion.

    Weighted least squares of p(L) = p_inf + a/L + b/L^2 with weights 1/err^2,
    run both with all points and with the smallest L dropped; the fit whose
    chi2 per dof is closest to 1 is reported. The p_inf error comes from the
    fit covariance, inflated by sqrt(chi2/dof) when that exceeds 1.
    """
    if len(points) < 3:
        raise ValueError("extrapolation needs at least 3 points")
    pts = sorted(points)
    ls = np.array([p[0] for p in pts], dtype=float)
    ps = np.array([p[1] for p in pts], dtype=float)
    errs = np.array([p[2] for p in pts], dtype=float)
    if len(set(ls.tolist())) != len(ls):
        raise ValueError("system sizes must be distinct")
    if np.any(errs <= 0):
        raise ValueError("errors must be positive")

    candidates = [0]
    if len(pts) >= 4:
        candidates.append(1)
    fits = []
    for skip in candidates:
        beta, cov, chi2, dof = _weighted_fit(ls[skip:], ps[skip:], errs[skip:])
        chi2_per_dof = chi2 / dof if dof > 0 else 0.0
        err = math.sqrt(cov[0, 0])
        if inflate_errors and chi2_per_dof > 1.0:
            err *= math.sqrt(chi2_per_dof)
        fits.append(FitResult(p_infinity=float(beta[0]), p_infinity_err=float(err),
                              coefficients=(float(beta[1]), float(beta[2])),
                              l_min_used=int(ls[skip]), chi2_per_dof=float(chi2_per_dof)))
    return min(fits, key=lambda f: abs(f.chi2_per_dof - 1.0))


def read_fit_csv(path) -> list[tuple[float, float, float]]:
    """Read extrapolation input: CSV with header columns L, p, p_err."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"L", "p", "p_err"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise ValueError(f"fit input needs header columns L,p,p_err; got {reader.fieldnames}")
        return [(float(row["L"]), float(row["p"]), float(row["p_err"])) for row in reader]
