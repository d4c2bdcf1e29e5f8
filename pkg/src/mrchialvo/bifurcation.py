"""One-parameter bifurcation analysis.

* brute-force attractor sweeps with carry-over seeding (forward/backward
  continuation), hysteresis and antimonotonicity (bubble) detection;
* continuation of a fixed-point branch with detection of fold (LP),
  flip (PD) and Neimark-Sacker (NS) points;
* the NS critical coupling ``k'`` and the first Lyapunov coefficient of the
  Neimark-Sacker normal form.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import ESCAPE_RADIUS, MapParams, NeuronState, iterate
from .fixed_points import (
    DegenerateParameterError,
    FixedPointRecord,
    bisect_root,
    coefficients,
    flux_of,
    make_record,
    residual_F,
)

LP, PD, NS = "LP", "PD", "NS"

PARAM_NAMES = ("k0", "k1", "k2", "k", "r", "h")


# --------------------------------------------------------------------------
# attractor sweeps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    param_name: str
    p_start: float
    p_end: float
    n_steps: int
    direction: str = "forward"
    n_transient: int = 2000
    n_record: int = 200
    seed_state: NeuronState = NeuronState(0.1, 0.0)

    def __post_init__(self):
        if self.param_name not in PARAM_NAMES:
            raise ValueError(f"unknown parameter {self.param_name!r}")
        if self.n_steps < 2:
            raise ValueError("n_steps must be >= 2")
        if self.direction not in ("forward", "backward"):
            raise ValueError("direction must be 'forward' or 'backward'")

    def values(self) -> np.ndarray:
        lo, hi = sorted((self.p_start, self.p_end))
        vals = np.linspace(lo, hi, self.n_steps)
        return vals if self.direction == "forward" else vals[::-1]


@dataclass
class BifurcationDiagram:
    """Recorded x-samples per parameter value, in sweep order.

    ``samples`` has shape (n_steps, n_record); rows of escaped parameter values
    are zero-filled and flagged in ``escaped``.
    """

    param_name: str
    param_values: np.ndarray
    samples: np.ndarray
    escaped: np.ndarray
    direction: str
    carry_state: bool = True

    def ascending(self) -> "BifurcationDiagram":
        """Same diagram reordered by increasing parameter value."""
        order = np.argsort(self.param_values, kind="stable")
        return BifurcationDiagram(self.param_name, self.param_values[order], self.samples[order],
                                  self.escaped[order], self.direction, self.carry_state)


def attractor_sweep(cfg: SweepConfig, p_base: MapParams) -> BifurcationDiagram:
    """Sweep one parameter, seeding each value with the final state of the previous one.

    After an escape the next value restarts from ``cfg.seed_state``.
    """
    values = cfg.values()
    samples = np.zeros((len(values), cfg.n_record))
    escaped = np.zeros(len(values), dtype=bool)
    state = cfg.seed_state
    for i, val in enumerate(values):
        p = p_base.with_(**{cfg.param_name: float(val)})
        orbit = iterate(state, p, cfg.n_transient, cfg.n_record)
        if orbit.escaped:
            escaped[i] = True
            state = cfg.seed_state
            continue
        samples[i] = orbit.x
        state = NeuronState(*orbit.states[-1])
    return BifurcationDiagram(cfg.param_name, values, samples, escaped, cfg.direction)


def forward_backward(p_base: MapParams, param_name: str, p_start: float, p_end: float,
                     n_steps: int, n_transient: int = 2000, n_record: int = 200,
                     seed_state: NeuronState = NeuronState(0.1, 0.0)):
    """Forward and backward sweeps, both returned in ascending parameter order."""
    out = []
    for direction in ("forward", "backward"):
        cfg = SweepConfig(param_name, p_start, p_end, n_steps, direction,
                          n_transient, n_record, seed_state)
        out.append(attractor_sweep(cfg, p_base).ascending())
    return tuple(out)


def sample_set_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between two 1-D sample sets."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))

    def directed(u, v):
        idx = np.clip(np.searchsorted(v, u), 1, len(v) - 1)
        return float(np.max(np.minimum(np.abs(u - v[idx - 1]), np.abs(u - v[idx]))))

    if len(a) == 1 or len(b) == 1:
        return float(max(np.max(np.abs(a[:, None] - b[None, :]).min(axis=1)),
                         np.max(np.abs(b[:, None] - a[None, :]).min(axis=1))))
    return max(directed(a, b), directed(b, a))


def hysteresis_mask(forward: BifurcationDiagram, backward: BifurcationDiagram,
                    tol: float = 1e-3) -> np.ndarray:
    """Parameter values (ascending order) where the two sweeps disagree."""
    f, b = forward.ascending(), backward.ascending()
    if not np.array_equal(f.param_values, b.param_values):
        raise ValueError("sweeps must share the parameter grid")
    out = np.zeros(len(f.param_values), dtype=bool)
    for i in range(len(out)):
        if f.escaped[i] != b.escaped[i]:
            out[i] = True
        elif not f.escaped[i]:
            out[i] = sample_set_distance(f.samples[i], b.samples[i]) > tol
    return out


def distinct_counts(diagram: BifurcationDiagram, tol: float = 1e-4) -> np.ndarray:
    """Number of distinct recorded values per parameter (gap clustering at ``tol``)."""
    counts = np.zeros(len(diagram.param_values), dtype=int)
    for i, row in enumerate(diagram.samples):
        if diagram.escaped[i]:
            continue
        s = np.sort(row)
        counts[i] = 1 + int(np.sum(np.diff(s) > tol))
    return counts


def detect_bubbles(diagram: BifurcationDiagram, chaos_count: int = 50,
                   tol: float = 1e-4) -> list[tuple[float, float]]:
    """Chaotic windows bounded on both sides by non-chaotic parameter values.

    Returns ``(first, last)`` parameter values of each maximal chaotic run
    (ascending order) that rises above ``chaos_count`` distinct values and
    falls back below it inside the swept window.
    """
    d = diagram.ascending()
    chaotic = (distinct_counts(d, tol) > chaos_count) & ~d.escaped
    bubbles = []
    i, n = 0, len(chaotic)
    while i < n:
        if chaotic[i]:
            j = i
            while j + 1 < n and chaotic[j + 1]:
                j += 1
            if i > 0 and j < n - 1 and not d.escaped[i - 1] and not d.escaped[j + 1]:
                bubbles.append((float(d.param_values[i]), float(d.param_values[j])))
            i = j + 1
        else:
            i += 1
    return bubbles


# --------------------------------------------------------------------------
# fixed-point branches
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CritPoint:
    param_value: float
    kind: str
    eigen_evidence: tuple
    branch_x: float


@dataclass
class Branch:
    param_name: str
    param_values: np.ndarray
    points: list
    crit_points: list
    terminated: bool = False

    @property
    def x(self) -> np.ndarray:
        return np.array([fp.x_star for fp in self.points])


def _char_tests(fp: FixedPointRecord) -> dict:
    """Test functions whose sign changes mark LP, PD and NS crossings."""
    s = fp.stability
    p, q = s.p_trace, s.q_det
    complex_pair = p * p < 4.0 * q
    return {
        LP: 1.0 - p + q,                                   # P(+1)
        PD: 1.0 + p + q,                                   # P(-1)
        NS: (q - 1.0) if complex_pair else math.nan,       # |lambda|^2 - 1
    }


def continue_root(p: MapParams, x_prev: float, width: float = 0.05, n_scan: int = 64,
                  ftol: float = 1e-13) -> Optional[float]:
    """Root of F closest to ``x_prev`` inside ``x_prev +- width``, or None."""
    f = lambda x: residual_F(x, p)
    f0 = f(x_prev)
    if f0 == 0.0:
        return x_prev
    best = None
    grid = np.linspace(x_prev - width, x_prev + width, 2 * n_scan + 1)
    vals = residual_F(grid, p)
    sgn = np.sign(vals)
    for i in range(len(grid) - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and sgn[i] * sgn[i + 1] <= 0:
            root = bisect_root(f, float(grid[i]), float(grid[i + 1]), float(vals[i]), ftol)
            if best is None or abs(root - x_prev) < abs(best - x_prev):
                best = root
    return best


def branch_track(p_base: MapParams, param_name: str, p_range: tuple[float, float],
                 n_steps: int, x_seed: float, refine_tol: float = 1e-8,
                 tol_unit_circle: float = 1e-6, seed_tol: float = 1e-6) -> Branch:
    """Continue the fixed point through ``x_seed`` across ``p_range``.

    Each step re-solves F near the previous root. A sign change of
    P(+1), P(-1) or |lambda|^2-1 (complex pair only) between consecutive
    steps yields an LP, PD or NS point, located by bisection on the parameter.
    When the root disappears the branch terminates with an LP at the last
    parameter value where it still exists.
    """
    if param_name not in PARAM_NAMES:
        raise ValueError(f"unknown parameter {param_name!r}")
    values = np.linspace(p_range[0], p_range[1], n_steps)
    p0 = p_base.with_(**{param_name: float(values[0])})
    if abs(residual_F(x_seed, p0)) > seed_tol:
        x0 = continue_root(p0, x_seed)
        if x0 is None:
            raise ValueError("x_seed is not a fixed point at the start of the range")
        x_seed = x0
    points = [make_record(x_seed, p0, tol_unit_circle)]
    crits: list[CritPoint] = []
    used = [float(values[0])]
    dx = 0.0
    for val in values[1:]:
        p = p_base.with_(**{param_name: float(val)})
        prev = points[-1]
        width = max(0.02, 4.0 * abs(dx))
        x = continue_root(p, prev.x_star, width)
        if x is None:
            lp_val, lp_x = _locate_fold(p_base, param_name, used[-1], float(val), prev.x_star, width, refine_tol)
            rec = make_record(lp_x, p_base.with_(**{param_name: lp_val}), tol_unit_circle)
            crits.append(CritPoint(lp_val, LP, rec.stability.eigenvalues, lp_x))
            return Branch(param_name, np.array(used), points, crits, terminated=True)
        rec = make_record(x, p, tol_unit_circle)
        for kind, (ta, tb) in _paired_tests(prev, rec):
            if np.isfinite(ta) and np.isfinite(tb) and ta * tb < 0:
                crits.append(_refine_crit(p_base, param_name, used[-1], float(val), prev.x_star,
                                          kind, refine_tol, tol_unit_circle))
        dx = x - prev.x_star
        points.append(rec)
        used.append(float(val))
    return Branch(param_name, np.array(used), points, crits)


def _paired_tests(a: FixedPointRecord, b: FixedPointRecord):
    ta, tb = _char_tests(a), _char_tests(b)
    return [(kind, (ta[kind], tb[kind])) for kind in (LP, PD, NS)]


def _refine_crit(p_base, name, v_a, v_b, x_a, kind, tol, tol_unit_circle) -> CritPoint:
    def test_at(val, x_guess):
        p = p_base.with_(**{name: val})
        x = continue_root(p, x_guess, width=max(0.02, 4 * abs(v_b - v_a)))
        if x is None:
            return math.nan, x_guess, None
        rec = make_record(x, p, tol_unit_circle)
        return _char_tests(rec)[kind], x, rec

    t_a, x_a, rec = test_at(v_a, x_a)
    lo, hi = v_a, v_b
    x_lo = x_a
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        t_m, x_m, rec_m = test_at(mid, x_lo)
        if not np.isfinite(t_m):
            hi = mid
            continue
        if (t_m > 0) == (t_a > 0):
            lo, x_lo, t_a = mid, x_m, t_m
        else:
            hi = mid
    val = 0.5 * (lo + hi)
    _, x, rec = test_at(val, x_lo)
    if rec is None:
        rec = make_record(x_lo, p_base.with_(**{name: lo}), tol_unit_circle)
        val = lo
    return CritPoint(val, kind, rec.stability.eigenvalues, rec.x_star)


def _locate_fold(p_base, name, v_ok, v_fail, x_ok, width, tol):
    lo, hi, x_lo = v_ok, v_fail, x_ok
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        # fine scan: near the fold the two merging roots are closer than a coarse grid cell
        x = continue_root(p_base.with_(**{name: mid}), x_lo, width, n_scan=4096)
        if x is None:
            hi = mid
        else:
            lo, x_lo = mid, x
    return lo, x_lo


# --------------------------------------------------------------------------
# Neimark-Sacker analysis
# --------------------------------------------------------------------------

@dataclass
class NSReport:
    k_prime: float
    trace_at_k: float
    eq15_ok: bool
    resonance_ok: bool
    x_star: float = math.nan
    phi_star: float = math.nan
    theta: float = math.nan
    alpha: float = math.nan
    beta: float = math.nan
    L11: complex = complex(math.nan)
    L12: complex = complex(math.nan)
    L21: complex = complex(math.nan)
    L22: complex = complex(math.nan)
    modulus_derivative: float = math.nan
    g_derivatives: dict = field(default_factory=dict, repr=False)
    taylor: dict = field(default_factory=dict, repr=False)

    @property
    def valid(self) -> bool:
        return self.eq15_ok and self.resonance_ok

    @property
    def supercritical_side(self) -> int:
        """+1 if the invariant circle (theta < 0) appears for k > k', else -1."""
        return 1 if self.modulus_derivative > 0 else -1


class NormalFormError(ArithmeticError):
    pass


def ns_critical_k(fp: FixedPointRecord, p: MapParams, denom_tol: float = 1e-12,
                  resonance_tol: float = 1e-9) -> NSReport:
    """Critical coupling ``k' = (1 + k2 (2-x*) g1) / (k1 g2 - k2 cos(pi phi*))``.

    ``eq15_ok`` reports ``|p(0)| < 2`` at ``k = k'``; ``resonance_ok`` additionally
    requires ``p(0)`` away from 0 and -1 (no 1:4 or 1:3 resonance).
    """
    x, phi = fp.x_star, fp.phi_star
    g1 = x * math.exp(p.r - x)
    g2 = math.pi * x * math.sin(math.pi * phi)
    c = math.cos(math.pi * phi)
    denom = p.k1 * g2 - p.k2 * c
    if abs(denom) < denom_tol:
        raise DegenerateParameterError("k1*gamma2 == k2*cos(pi*phi*): no NS coupling exists")
    kp = (1.0 + p.k2 * (2.0 - x) * g1) / denom
    s = (2.0 - x) * g1 + kp * c
    trace = s - p.k2
    eq15 = abs(trace) < 2.0
    resonance = eq15 and abs(s - p.k2) > resonance_tol and abs(s - (p.k2 - 1.0)) > resonance_tol
    return NSReport(k_prime=kp, trace_at_k=trace, eq15_ok=eq15, resonance_ok=resonance,
                    x_star=x, phi_star=phi)


def ns_self_consistent(p: MapParams, x_guess: float, damping: float = 0.5,
                       tol: float = 1e-10, max_iter: int = 500, width: float = 0.05):
    """Solve ``k = k'(x*(k))`` jointly with the fixed point.

    Damped fixed-point iteration on k, tracking the fixed point near
    ``x_guess``; if it fails to converge, a secant solve on ``k'(k) - k`` is
    used instead. Returns ``(params_at_k_prime, fixed_point_record, report)``.
    """
    k = p.k
    x = continue_root(p, x_guess, width)
    if x is None:
        raise ValueError("no fixed point near x_guess")

    def kprime_at(k, x_prev):
        q = p.with_(k=k)
        xr = continue_root(q, x_prev, width)
        if xr is None:
            raise ValueError("fixed point lost during k' iteration")
        return ns_critical_k(make_record(xr, q), q).k_prime, xr

    converged = False
    try:
        for _ in range(max_iter):
            kp, x = kprime_at(k, x)
            k_new = (1.0 - damping) * k + damping * kp
            if abs(k_new - k) < tol:
                k = k_new
                converged = True
                break
            k = k_new
    except (ValueError, DegenerateParameterError):
        converged = False
    if not converged:
        k, x = _secant_kprime(kprime_at, p.k, continue_root(p, x_guess, width), tol, max_iter)
    # polish so that k equals k' of the final fixed point exactly
    for _ in range(3):
        kp, x = kprime_at(k, x)
        k = kp
    q = p.with_(k=k)
    x = continue_root(q, x, width)
    fp = make_record(x, q)
    return q, fp, ns_critical_k(fp, q)


def _secant_kprime(kprime_at, k0, x0, tol, max_iter):
    g = lambda k, x: kprime_at(k, x)
    k_a = k0
    kp_a, x_a = g(k_a, x0)
    k_b = kp_a
    kp_b, x_b = g(k_b, x_a)
    for _ in range(max_iter):
        fa, fb = kp_a - k_a, kp_b - k_b
        if fb == fa:
            break
        k_c = k_b - fb * (k_b - k_a) / (fb - fa)
        k_a, kp_a, x_a = k_b, kp_b, x_b
        k_b = k_c
        kp_b, x_b = g(k_b, x_a)
        if abs(kp_b - k_b) < tol:
            return k_b, x_b
    raise NormalFormError("self-consistent k' did not converge")


def taylor_coefficients(x: float, phi: float, p: MapParams, printed: bool = False) -> dict:
    """Expansion of the shifted map about (x*, phi*) up to third order.

    ``a11..a22`` form the linear part; ``a13, a14, a15`` (X^2, X Phi, Phi^2)
    and ``b1..b4`` (X^3, X^2 Phi, X Phi^2, Phi^3) the nonlinear part of the
    first component. The second component is linear, so ``a23..a25`` and
    ``c1..c4`` vanish.

    With ``printed=True`` the variants of a13, b1, b3, b4 from the original
    derivation are used instead; they differ from the true Taylor
    coefficients of ``x^2 e^(r-x) + k x cos(pi phi)`` and are kept only for
    comparison.
    """
    e = math.exp(p.r - x)
    k = p.k
    s, c = math.sin(math.pi * phi), math.cos(math.pi * phi)
    pi = math.pi
    co = {
        "a11": (2.0 - x) * x * e + k * c,
        "a12": -pi * k * x * s,
        "a21": p.k1,
        "a22": -p.k2,
        "a13": e * (x * x - 4.0 * x + 2.0) / 2.0,
        "a14": -pi * k * s,
        "a15": -pi * pi * k * x * c / 2.0,
        "b1": e * (-x * x + 6.0 * x - 6.0) / 6.0,
        "b2": 0.0,
        "b3": -pi * pi * k * c / 2.0,
        "b4": pi ** 3 * k * x * s / 6.0,
        "a23": 0.0, "a24": 0.0, "a25": 0.0,
        "c1": 0.0, "c2": 0.0, "c3": 0.0, "c4": 0.0,
    }
    if printed:
        co["a13"] = e * (x - 2.0) ** 2 / 2.0
        co["b1"] = e * (x - 2.0) * (4.0 - x) / 12.0
        co["b3"] = -pi * pi * k * c / 12.0
        co["b4"] = pi ** 3 * k * x * s / 12.0
    return co


def _derivative_tensors(co: dict, second: bool):
    """Second/third derivative tensors of (f1, f2) in (X, Phi) at the origin."""
    if second:
        d1 = np.array([[2 * co["a13"], co["a14"]], [co["a14"], 2 * co["a15"]]])
        d2 = np.array([[2 * co["a23"], co["a24"]], [co["a24"], 2 * co["a25"]]])
        return d1, d2
    t1 = np.zeros((2, 2, 2))
    t2 = np.zeros((2, 2, 2))
    for t, (c_xxx, c_xxp, c_xpp, c_ppp) in ((t1, ("b1", "b2", "b3", "b4")), (t2, ("c1", "c2", "c3", "c4"))):
        t[0, 0, 0] = 6 * co[c_xxx]
        t[0, 0, 1] = t[0, 1, 0] = t[1, 0, 0] = 2 * co[c_xxp]
        t[0, 1, 1] = t[1, 0, 1] = t[1, 1, 0] = 2 * co[c_xpp]
        t[1, 1, 1] = 6 * co[c_ppp]
    return t1, t2


def normal_form_transform(co: dict) -> tuple[np.ndarray, float, float]:
    """``T`` with ``(X, Phi) = T (u, v)`` putting the linear part in rotation form."""
    a11, a12, a21, a22 = co["a11"], co["a12"], co["a21"], co["a22"]
    p0 = a11 + a22
    q0 = a11 * a22 - a12 * a21
    disc = 4.0 * q0 - p0 * p0
    if disc <= 0.0:
        raise NormalFormError("eigenvalues are not a complex pair (4q - p^2 <= 0)")
    alpha, beta = p0 / 2.0, 0.5 * math.sqrt(disc)
    if a12 == 0.0:
        raise NormalFormError("a12 = 0: transformation is singular")
    T = np.array([[a12, 0.0], [alpha - a11, -beta]])
    return T, alpha, beta


def g_derivatives(co: dict) -> dict:
    """Partial derivatives of G1, G2 at (u, v) = 0, keyed like ``'G1_uv'``."""
    T, alpha, beta = normal_form_transform(co)
    Tinv = np.linalg.inv(T)
    h1, h2 = _derivative_tensors(co, second=True)
    t1, t2 = _derivative_tensors(co, second=False)
    # derivatives of f_i(T w) with respect to w = (u, v)
    H = [T.T @ h @ T for h in (h1, h2)]
    D = [np.einsum("abc,ai,bj,ck->ijk", t, T, T, T) for t in (t1, t2)]
    names2 = {"uu": (0, 0), "uv": (0, 1), "vv": (1, 1)}
    names3 = {"uuu": (0, 0, 0), "uuv": (0, 0, 1), "uvv": (0, 1, 1), "vvv": (1, 1, 1)}
    out = {}
    for g in (0, 1):
        for name, ij in names2.items():
            out[f"G{g + 1}_{name}"] = float(Tinv[g, 0] * H[0][ij] + Tinv[g, 1] * H[1][ij])
        for name, ijk in names3.items():
            out[f"G{g + 1}_{name}"] = float(Tinv[g, 0] * D[0][ijk] + Tinv[g, 1] * D[1][ijk])
    return out


def first_lyapunov_from_derivatives(d: dict, alpha: float, beta: float):
    lam1 = complex(alpha, beta)
    lam2 = lam1.conjugate()
    L11 = 0.25 * complex(d["G1_uu"] + d["G1_vv"], d["G2_uu"] + d["G2_vv"])
    L12 = 0.125 * complex(d["G1_uu"] - d["G1_vv"] + 2 * d["G2_uv"],
                          d["G2_uu"] - d["G2_vv"] - 2 * d["G1_uv"])
    L21 = 0.125 * complex(d["G1_uu"] - d["G1_vv"] - 2 * d["G2_uv"],
                          d["G2_uu"] - d["G2_vv"] + 2 * d["G1_uv"])
    L22 = (1 / 16) * complex(d["G1_uuu"] + d["G1_uvv"] + d["G2_uuv"] + d["G2_vvv"],
                             d["G2_uuu"] + d["G2_uvv"] - d["G1_uuv"] - d["G1_vvv"])
    theta = (-(((1 - 2 * lam1) * lam2 ** 2 / (1 - lam1)) * L11 * L12).real
             - 0.5 * abs(L11) ** 2 - abs(L21) ** 2 + (lam2 * L22).real)
    return theta, L11, L12, L21, L22


def ns_modulus_derivative(fp: FixedPointRecord, p_at_k_prime: MapParams) -> float:
    """d|lambda|/dk at k = k' with the fixed point held at (x*, phi*)."""
    x, phi = fp.x_star, fp.phi_star
    g1 = x * math.exp(p_at_k_prime.r - x)
    g2 = math.pi * x * math.sin(math.pi * phi)
    c = math.cos(math.pi * phi)
    k1, k2, kp = p_at_k_prime.k1, p_at_k_prime.k2, p_at_k_prime.k
    q = kp * k1 * g2 - k2 * ((2.0 - x) * g1 + kp * c)
    return (k1 * g2 - k2 * c) / (2.0 * math.sqrt(q))


def ns_first_lyapunov(p_at_k_prime: MapParams, fp: FixedPointRecord,
                      printed_coefficients: bool = False) -> NSReport:
    """Full Neimark-Sacker report at ``k = k'``; ``theta < 0`` means supercritical."""
    rep = ns_critical_k(fp, p_at_k_prime)
    co = taylor_coefficients(fp.x_star, fp.phi_star, p_at_k_prime, printed=printed_coefficients)
    T, alpha, beta = normal_form_transform(co)
    d = g_derivatives(co)
    theta, L11, L12, L21, L22 = first_lyapunov_from_derivatives(d, alpha, beta)
    rep.theta, rep.alpha, rep.beta = theta, alpha, beta
    rep.L11, rep.L12, rep.L21, rep.L22 = L11, L12, L21, L22
    rep.modulus_derivative = ns_modulus_derivative(fp, p_at_k_prime)
    rep.g_derivatives = d
    rep.taylor = co
    return rep


def transformed_map(p_at_k_prime: MapParams, fp: FixedPointRecord):
    """The nonlinear part ``G(u, v)`` of the map in normal-form coordinates.

    Built directly from the map (not from the Taylor coefficients), so its
    finite-difference derivatives are an independent check of ``g_derivatives``.
    """
    co = taylor_coefficients(fp.x_star, fp.phi_star, p_at_k_prime)
    T, alpha, beta = normal_form_transform(co)
    Tinv = np.linalg.inv(T)
    J = np.array([[co["a11"], co["a12"]], [co["a21"], co["a22"]]])
    p = p_at_k_prime
    x0, f0 = fp.x_star, fp.phi_star

    def G(u, v):
        X, F = T @ np.array([u, v])
        x, f = x0 + X, f0 + F
        nx = x * x * math.exp(p.r - x) + p.k0 + p.k * x * math.cos(math.pi * f)
        nf = p.k1 * x - p.k2 * f
        res = np.array([nx - x0, nf - f0]) - J @ np.array([X, F])
        return Tinv @ res

    return G
