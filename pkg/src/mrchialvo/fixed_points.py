"""Fixed points of the memristive Chialvo map and their linear stability.

Fixed points satisfy ``phi = k1 x / (1 + k2)``, so their x-components are the
roots of the scalar residual::

    F(x) = x^2 e^(r-x) + k0 + k x cos(pi k1 x / (1 + k2)) - x

Roots are bracketed on a uniform scan grid and refined by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import MapParams, NeuronState, step

#: Lower bound on k2 in the uniqueness theorem's hypotheses; the theorem
#: statement uses 4*pi while its proof only needs 2*pi.
THEOREM1_K2_BOUND = 4 * math.pi

STABLE = "stable"
SADDLE = "saddle"
REPELLER = "repeller"
NON_HYPERBOLIC = "non_hyperbolic"


class DegenerateParameterError(ZeroDivisionError):
    pass


class NotAFixedPointError(ValueError):
    pass


@dataclass(frozen=True)
class StabilityReport:
    p_trace: float
    q_det: float
    gamma1: float
    gamma2: float
    eigenvalues: tuple
    kind: str

    @property
    def moduli(self) -> tuple:
        return tuple(abs(lam) for lam in self.eigenvalues)


@dataclass(frozen=True)
class FixedPointRecord:
    x_star: float
    phi_star: float
    residual: float
    stability: StabilityReport
    degenerate: bool = False

    @property
    def state(self) -> NeuronState:
        return NeuronState(self.x_star, self.phi_star)


@dataclass(frozen=True)
class Theorem1Bounds:
    n_cap: int
    m1: float
    m2: float


def _check_k2(p: MapParams):
    if p.k2 == -1.0:
        raise DegenerateParameterError("k2 = -1 makes phi* = k1 x / (1 + k2) undefined")


def flux_of(x, p: MapParams):
    """Flux component of the fixed point with membrane potential ``x``."""
    _check_k2(p)
    return p.k1 * x / (1.0 + p.k2)


def residual_F(x, p: MapParams):
    """Scalar fixed-point residual; accepts floats or arrays."""
    _check_k2(p)
    c = p.k1 / (1.0 + p.k2)
    if np.ndim(x) == 0:
        x = float(x)
        return x * x * math.exp(p.r - x) + p.k0 + p.k * x * math.cos(math.pi * c * x) - x
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return x * x * np.exp(p.r - x) + p.k0 + p.k * x * np.cos(np.pi * c * x) - x


def jacobian(s: NeuronState, p: MapParams) -> np.ndarray:
    x, phi = s.x, s.phi
    e = math.exp(p.r - x)
    return np.array([
        [(2.0 - x) * x * e + p.k * math.cos(math.pi * phi), -p.k * math.pi * x * math.sin(math.pi * phi)],
        [p.k1, -p.k2],
    ])


def quadratic_roots(trace: float, det: float) -> tuple:
    """Roots of ``lam^2 - trace lam + det``, larger real part first."""
    disc = trace * trace - 4.0 * det
    if disc >= 0.0:
        sq = math.sqrt(disc)
        # cancellation-free form for the smaller-magnitude root
        big = 0.5 * (trace + math.copysign(sq, trace)) if trace != 0.0 else 0.5 * sq
        small = det / big if big != 0.0 else 0.5 * (trace - sq)
        lams = sorted([big, small], reverse=True)
        return (complex(lams[0]), complex(lams[1]))
    half = 0.5 * math.sqrt(-disc)
    return (complex(0.5 * trace, half), complex(0.5 * trace, -half))


def kind_from_moduli(moduli, tol_unit_circle: float = 1e-6) -> str:
    if any(abs(m - 1.0) < tol_unit_circle for m in moduli):
        return NON_HYPERBOLIC
    outside = sum(m > 1.0 for m in moduli)
    return (STABLE, SADDLE, REPELLER)[outside]


def stability_from_coefficients(p_trace: float, q_det: float, gamma1: float = math.nan,
                                gamma2: float = math.nan,
                                tol_unit_circle: float = 1e-6) -> StabilityReport:
    lams = quadratic_roots(p_trace, q_det)
    return StabilityReport(p_trace, q_det, gamma1, gamma2, lams,
                           kind_from_moduli([abs(l) for l in lams], tol_unit_circle))


def coefficients(x: float, phi: float, p: MapParams) -> tuple[float, float, float, float]:
    """``(p, q, gamma1, gamma2)`` of the characteristic polynomial at (x, phi).

    ``q`` is the Jacobian determinant ``-k2[(2-x) gamma1 + k cos(pi phi)] + k k1 gamma2``.
    """
    g1 = x * math.exp(p.r - x)
    g2 = math.pi * x * math.sin(math.pi * phi)
    c = math.cos(math.pi * phi)
    a11 = (2.0 - x) * g1 + p.k * c
    return a11 - p.k2, -p.k2 * a11 + p.k * p.k1 * g2, g1, g2


def classify(fp_x: float, fp_phi: float, p: MapParams, tol_unit_circle: float = 1e-6,
             fixed_point_tol: float = 1e-6) -> StabilityReport:
    """Eigenvalues and stability class of a fixed point."""
    img = step(NeuronState(fp_x, fp_phi), p)
    if img is None or abs(img.x - fp_x) > fixed_point_tol or abs(img.phi - fp_phi) > fixed_point_tol:
        raise NotAFixedPointError(f"({fp_x}, {fp_phi}) is not a fixed point to {fixed_point_tol}")
    pt, qd, g1, g2 = coefficients(fp_x, fp_phi, p)
    return stability_from_coefficients(pt, qd, g1, g2, tol_unit_circle)


def bisect_root(f, lo: float, hi: float, flo: Optional[float] = None,
                ftol: float = 1e-12, max_steps: int = 200) -> float:
    """Bisection on a sign-changing bracket until ``|f| < ftol`` or ``max_steps``."""
    flo = f(lo) if flo is None else flo
    if flo == 0.0:
        return lo
    best, fbest = lo, abs(flo)
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        fm = f(mid)
        if abs(fm) < fbest:
            best, fbest = mid, abs(fm)
        if fm == 0.0 or abs(fm) < ftol:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return best


def _golden_min(f, a: float, b: float, tol: float = 1e-15, max_iter: int = 200) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) < tol * max(1.0, abs(a)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def make_record(x: float, p: MapParams, tol_unit_circle: float = 1e-6,
                degenerate: bool = False) -> FixedPointRecord:
    phi = flux_of(x, p)
    pt, qd, g1, g2 = coefficients(x, phi, p)
    return FixedPointRecord(x, phi, abs(residual_F(x, p)),
                            stability_from_coefficients(pt, qd, g1, g2, tol_unit_circle),
                            degenerate)


def find_fixed_points(p: MapParams, x_lo: float = -1.0, x_hi: float = 10.0,
                      scan_points: int = 20000, ftol: float = 1e-12,
                      tol_unit_circle: float = 1e-6) -> list[FixedPointRecord]:
    """All fixed points with x in [x_lo, x_hi], sorted by x.

    Each sign change of F on the scan grid is refined by bisection. Cells where
    |F| dips below 1e-9 without a sign change are searched for a tangent root
    by golden-section minimisation of |F|; such roots are kept only if the
    minimum is below 1e-10 and are flagged ``degenerate``.
    """
    _check_k2(p)
    if not x_lo < x_hi:
        raise ValueError("x_lo must be < x_hi")
    if scan_points < 2:
        raise ValueError("scan_points must be >= 2")
    grid = np.linspace(x_lo, x_hi, scan_points)
    vals = residual_F(grid, p)
    mids = residual_F(0.5 * (grid[:-1] + grid[1:]), p)
    f = lambda x: residual_F(x, p)
    fa, fb = vals[:-1], vals[1:]
    finite = np.isfinite(fa) & np.isfinite(fb)
    crossing = finite & (np.sign(fa) * np.sign(fb) < 0)
    # no sign change but |F| nearly touches zero: possible tangent root
    dips = finite & ~crossing & (fa != 0.0) & (
        (np.minimum(np.abs(fa), np.abs(fb)) < 1e-9)
        | ((np.abs(mids) < 1e-9) & ((mids > 0) == (fa > 0))))
    roots: list[tuple[float, bool]] = []
    for i in np.flatnonzero(finite & ((fa == 0.0) | crossing | dips)):
        a, b = float(grid[i]), float(grid[i + 1])
        if fa[i] == 0.0:
            roots.append((a, False))
        elif crossing[i]:
            roots.append((bisect_root(f, a, b, float(fa[i]), ftol), False))
        else:
            xm = _golden_min(lambda x: abs(f(x)), a, b)
            if abs(f(xm)) < 1e-10 and a < xm < b:
                roots.append((xm, True))
    if vals[-1] == 0.0:
        roots.append((float(grid[-1]), False))
    return [make_record(x, p, tol_unit_circle, deg) for x, deg in sorted(roots)]


def theorem1_check(p: MapParams, n_cap: int, k2_bound: float = THEOREM1_K2_BOUND):
    """Evaluate the uniqueness-theorem hypotheses.

    Returns ``(holds, bounds, violated)`` where ``violated`` lists the failing
    conditions by name.
    """
    if n_cap <= 1:
        raise ValueError("N must be a natural number > 1")
    m1 = n_cap + 2.0
    bounds = Theorem1Bounds(n_cap, m1, p.k1 * m1 / (1.0 + p.k2))
    checks = {
        "0<k0<N": 0.0 < p.k0 < n_cap,
        "|k|<1/M1": -1.0 / m1 < p.k < 1.0 / m1,
        "0<k1<1": 0.0 < p.k1 < 1.0,
        "k2>=4pi": p.k2 >= k2_bound,
        "r<0": p.r < 0.0,
    }
    violated = [name for name, ok in checks.items() if not ok]
    return not violated, bounds, violated
