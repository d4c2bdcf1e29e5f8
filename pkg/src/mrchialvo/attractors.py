"""Attractor classification, basins of attraction, Lyapunov exponents and
correlation dimension.

Cells of a basin grid are iterated in fixed-size blocks of vectorised
arithmetic. Blocks may be farmed out to threads; each block's result depends
only on its own cells, and blocks are merged serially in row-major order, so
the output is bit-identical for any thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import cdist

from .core import ESCAPE_RADIUS, EscapedOrbitError, MapParams, NeuronState, iterate, step_arrays
from .rng import SplitMix64

DIVERGENT = "divergent"
PERIODIC = "periodic"
QUASIPERIODIC = "quasiperiodic"
CHAOTIC = "chaotic"

BLOCK_SIZE = 4096


@dataclass(frozen=True)
class Budget:
    transient: int = 5000
    tail: int = 2000
    p_max: int = 64
    recurrence_tol: float = 1e-7
    recurrence_window: int = 128
    lyap_threshold: float = 0.01
    # cells still contracting onto a cycle get up to this many extra tails
    settle_rounds: int = 4
    escape_radius: float = ESCAPE_RADIUS

    def __post_init__(self):
        if self.tail < self.recurrence_window + self.p_max:
            raise ValueError("tail must cover recurrence_window + p_max states")
        if self.p_max < 1 or self.transient < 0:
            raise ValueError("invalid budget")


@dataclass
class AttractorRecord:
    kind: str
    period: Optional[int]
    representative: np.ndarray
    lyap_max: float
    label_id: int = -1

    @property
    def name(self) -> str:
        return f"periodic({self.period})" if self.kind == PERIODIC else self.kind


@dataclass
class _Batch:
    escaped: np.ndarray
    period: np.ndarray       # 0 when no period <= p_max was found
    lyap: np.ndarray
    ring: np.ndarray         # (n_cells, ring_len, 2), chronological


def _jacobian_terms(x, phi, p):
    e = np.exp(p.r - x)
    c = np.cos(np.pi * phi)
    s = np.sin(np.pi * phi)
    a11 = (2.0 - x) * x * e + p.k * c
    a12 = -p.k * np.pi * x * s
    xn = x * x * e + p.k0 + p.k * x * c
    return xn, a11, a12


def _advance(x, phi, p, n, escaped, radius, ring=None, tangent=None):
    """Iterate ``n`` steps in place-free fashion; optional ring capture and tangent growth."""
    ring_len = 0 if ring is None else ring.shape[1]
    lyap_acc = None
    if tangent is not None:
        vx, vp = tangent
        lyap_acc = np.zeros_like(x)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for i in range(n):
            if tangent is not None:
                xn, a11, a12 = _jacobian_terms(x, phi, p)
                vx, vp = a11 * vx + a12 * vp, p.k1 * vx - p.k2 * vp
                norm = np.hypot(vx, vp)
                norm = np.where(escaped | ~np.isfinite(norm) | (norm == 0.0), 1.0, norm)
                lyap_acc += np.log(norm)
                vx = vx / norm
                vp = vp / norm
            else:
                xn, _ = step_arrays(x, phi, p)
            phin = p.k1 * x - p.k2 * phi
            bad = ~np.isfinite(xn) | (np.abs(xn) > radius)
            if bad.any():
                escaped |= bad
            # escaped cells are parked at the origin so they stay finite
            x = np.where(escaped, 0.0, xn)
            phi = np.where(escaped, 0.0, phin)
            j = i - (n - ring_len)
            if ring is not None and j >= 0:
                ring[:, j, 0] = x
                ring[:, j, 1] = phi
    if tangent is not None:
        return x, phi, (vx, vp), lyap_acc
    return x, phi, None, None


def _detect_period(ring: np.ndarray, budget: Budget) -> np.ndarray:
    w = budget.recurrence_window
    tail = ring[:, -w:, :]
    period = np.zeros(len(ring), dtype=np.int64)
    undecided = np.ones(len(ring), dtype=bool)
    for q in range(1, budget.p_max + 1):
        lagged = ring[:, -w - q:ring.shape[1] - q, :]
        ok = np.all(np.abs(tail - lagged) < budget.recurrence_tol, axis=(1, 2)) & undecided
        period[ok] = q
        undecided &= ~ok
        if not undecided.any():
            break
    return period


def _classify_block(x0: np.ndarray, phi0: np.ndarray, p: MapParams, budget: Budget) -> _Batch:
    x = np.asarray(x0, dtype=float).copy()
    phi = np.asarray(phi0, dtype=float).copy()
    escaped = ~(np.isfinite(x) & np.isfinite(phi)) | (np.abs(x) > budget.escape_radius)
    x = np.where(escaped, 0.0, x)
    phi = np.where(escaped, 0.0, phi)
    x, phi, _, _ = _advance(x, phi, p, budget.transient, escaped, budget.escape_radius)
    ring_len = budget.recurrence_window + budget.p_max
    ring = np.zeros((len(x), ring_len, 2))
    tangent = (np.ones_like(x), np.zeros_like(x))
    x, phi, tangent, acc = _advance(x, phi, p, budget.tail, escaped, budget.escape_radius, ring, tangent)
    lyap = acc / budget.tail
    period = _detect_period(ring, budget)

    # cells with a contracting tail but no detected period are still settling
    for _ in range(budget.settle_rounds):
        pending = (~escaped) & (period == 0) & (lyap < -budget.lyap_threshold)
        if not pending.any():
            break
        idx = np.flatnonzero(pending)
        sub_esc = escaped[idx].copy()
        sub_ring = np.zeros((len(idx), ring_len, 2))
        sub_tan = (tangent[0][idx], tangent[1][idx])
        sx, sp, sub_tan, sacc = _advance(x[idx], phi[idx], p, budget.tail, sub_esc,
                                         budget.escape_radius, sub_ring, sub_tan)
        x[idx], phi[idx] = sx, sp
        escaped[idx] = sub_esc
        ring[idx] = sub_ring
        lyap[idx] = sacc / budget.tail
        period[idx] = _detect_period(sub_ring, budget)
    period[escaped] = 0
    lyap[escaped] = math.nan
    return _Batch(escaped, period, lyap, ring)


def _cycle_points(ring_row: np.ndarray, period: int) -> np.ndarray:
    """The ``period`` distinct points of a cycle, rotated to start at the smallest x."""
    pts = ring_row[-period:]
    start = int(np.lexsort((pts[:, 1], pts[:, 0]))[0])
    return np.roll(pts, -start, axis=0)


def _spread_points(ring_row: np.ndarray, n: int = 64) -> np.ndarray:
    idx = np.linspace(0, len(ring_row) - 1, n).round().astype(int)
    return ring_row[idx]


def _record_from_batch(b: _Batch, i: int, budget: Budget) -> AttractorRecord:
    if b.escaped[i]:
        return AttractorRecord(DIVERGENT, None, np.empty((0, 2)), math.nan)
    per = int(b.period[i])
    if per:
        return AttractorRecord(PERIODIC, per, _cycle_points(b.ring[i], per), float(b.lyap[i]))
    kind = CHAOTIC if b.lyap[i] > budget.lyap_threshold else QUASIPERIODIC
    return AttractorRecord(kind, None, _spread_points(b.ring[i]), float(b.lyap[i]))


def classify_attractor(s0: NeuronState, p: MapParams, budget: Budget = Budget()) -> AttractorRecord:
    """Escape check, then exact recurrence up to ``p_max``, then the Lyapunov split.

    A bounded orbit without a detected period is chaotic when its largest
    Lyapunov exponent exceeds ``lyap_threshold`` and quasiperiodic otherwise.
    """
    b = _classify_block(np.array([s0.x]), np.array([s0.phi]), p, budget)
    return _record_from_batch(b, 0, budget)


def largest_lyapunov(s0: NeuronState, p: MapParams, n: int, n_transient: int = 1000,
                     escape_radius: float = ESCAPE_RADIUS) -> float:
    """Mean log growth of a tangent vector, renormalised every step."""
    if n < 1:
        raise ValueError("n must be >= 1")
    x, phi = float(s0.x), float(s0.phi)
    vx, vp = 1.0, 0.0
    acc = 0.0
    exp, cos, sin, pi = math.exp, math.cos, math.sin, math.pi
    for i in range(n_transient + n):
        try:
            e = exp(p.r - x)
        except OverflowError:
            raise EscapedOrbitError(f"orbit escaped at step {i + 1}") from None
        c, s = cos(pi * phi), sin(pi * phi)
        a11 = (2.0 - x) * x * e + p.k * c
        a12 = -p.k * pi * x * s
        xn = x * x * e + p.k0 + p.k * x * c
        if not math.isfinite(xn) or abs(xn) > escape_radius:
            raise EscapedOrbitError(f"orbit escaped at step {i + 1}")
        vx, vp = a11 * vx + a12 * vp, p.k1 * vx - p.k2 * vp
        norm = math.hypot(vx, vp)
        if norm == 0.0:
            return -math.inf
        if i >= n_transient:
            acc += math.log(norm)
        vx, vp = vx / norm, vp / norm
        x, phi = xn, p.k1 * x - p.k2 * phi
    return acc / n


# --------------------------------------------------------------------------
# basins
# --------------------------------------------------------------------------

def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric nearest-point (Hausdorff) distance between two point sets."""
    if len(a) == 0 or len(b) == 0:
        return 0.0 if len(a) == len(b) else math.inf
    d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(-1))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


@dataclass
class _Label:
    record: AttractorRecord
    cloud: Optional[np.ndarray] = None
    tree: Optional[cKDTree] = None
    radius: float = 0.0


class AttractorTable:
    """Serial, first-encounter attractor identification used by basin grids.

    Periodic attractors match when periods agree and their cycles lie within
    ``tol`` in Hausdorff distance. Aperiodic attractors are compared
    geometrically against a dense reference cloud of the first orbit seen on
    them: a cell matches when all its representative points lie within
    ``max(tol, 3 * q99 nearest-neighbour spacing of the cloud)`` of the cloud.
    The kind of an aperiodic label is decided from the reference orbit.
    """

    def __init__(self, p: MapParams, budget: Budget, tol: float = 1e-4, cloud_len: int = 20000):
        self.p = p
        self.budget = budget
        self.tol = tol
        self.cloud_len = cloud_len
        self.labels: list[_Label] = []

    def _new(self, rec: AttractorRecord, cloud=None) -> int:
        rec.label_id = len(self.labels)
        lab = _Label(rec)
        if cloud is not None:
            lab.cloud = cloud
            lab.tree = cKDTree(cloud)
            nn, _ = lab.tree.query(cloud, k=2)
            lab.radius = max(self.tol, 3.0 * float(np.quantile(nn[:, 1], 0.99)))
        self.labels.append(lab)
        return rec.label_id

    def matches(self, rec: AttractorRecord, lab: _Label) -> bool:
        other = lab.record
        if rec.kind == DIVERGENT or other.kind == DIVERGENT:
            return rec.kind == other.kind
        if (rec.kind == PERIODIC) != (other.kind == PERIODIC):
            return False
        if rec.kind == PERIODIC:
            return rec.period == other.period and hausdorff(rec.representative, other.representative) <= self.tol
        d, _ = lab.tree.query(rec.representative)
        return bool(np.all(d <= lab.radius))

    def assign(self, rec: AttractorRecord) -> int:
        for lab in self.labels:
            if self.matches(rec, lab):
                return lab.record.label_id
        if rec.kind in (CHAOTIC, QUASIPERIODIC):
            start = NeuronState(*rec.representative[-1])
            orbit = iterate(start, self.p, 0, self.cloud_len, self.budget.escape_radius)
            if orbit.escaped:
                # transient chaos that eventually escapes
                return self.assign(AttractorRecord(DIVERGENT, None, np.empty((0, 2)), math.nan))
            lyap = largest_lyapunov(start, self.p, self.cloud_len, 0, self.budget.escape_radius)
            kind = CHAOTIC if lyap > self.budget.lyap_threshold else QUASIPERIODIC
            ref = AttractorRecord(kind, None, rec.representative, lyap)
            return self._new(ref, orbit.states)
        return self._new(rec)

    @property
    def records(self) -> dict:
        return {lab.record.label_id: lab.record for lab in self.labels}


@dataclass
class BasinGrid:
    x_range: tuple
    phi_range: tuple
    nx: int
    nphi: int
    cells: np.ndarray                 # (nphi, nx) int labels, row-major over phi then x
    attractor_table: dict = field(default_factory=dict)

    def class_names(self) -> set:
        used = np.unique(self.cells)
        return {self.attractor_table[int(u)].name for u in used}

    def label_counts(self) -> dict:
        labels, counts = np.unique(self.cells, return_counts=True)
        return {int(l): int(c) for l, c in zip(labels, counts)}

    def divergent_fraction(self) -> float:
        div = [lid for lid, rec in self.attractor_table.items() if rec.kind == DIVERGENT]
        return float(np.isin(self.cells, div).mean())


def grid_axes(x_range, phi_range, nx, nphi):
    return np.linspace(x_range[0], x_range[1], nx), np.linspace(phi_range[0], phi_range[1], nphi)


def basin_grid(x_range: tuple, phi_range: tuple, nx: int, nphi: int, p: MapParams,
               budget: Budget = Budget(), threads: int = 1, tol: float = 1e-4,
               block_size: int = BLOCK_SIZE) -> BasinGrid:
    """Label every initial condition of an ``nphi x nx`` grid by its attractor."""
    if nx < 2 or nphi < 2:
        raise ValueError("nx and nphi must be >= 2")
    xs, phis = grid_axes(x_range, phi_range, nx, nphi)
    X, P = np.meshgrid(xs, phis)
    flat_x, flat_p = X.ravel(), P.ravel()
    starts = range(0, len(flat_x), block_size)
    work = lambda s: _classify_block(flat_x[s:s + block_size], flat_p[s:s + block_size], p, budget)

    table = AttractorTable(p, budget, tol)
    labels = np.empty(len(flat_x), dtype=np.int64)

    def merge(s, batch):
        for j in range(len(batch.escaped)):
            labels[s + j] = table.assign(_record_from_batch(batch, j, budget))

    if threads <= 1:
        for s in starts:
            merge(s, work(s))
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for s, batch in zip(starts, pool.map(work, starts)):
                merge(s, batch)
    return BasinGrid(tuple(x_range), tuple(phi_range), nx, nphi,
                     labels.reshape(nphi, nx), table.records)


def prescan_window(p: MapParams, x_range: tuple = (-5.0, 15.0), phi_range: tuple = (-3.0, 3.0),
                   n: int = 40, budget: Budget = Budget(), inflate: float = 0.5,
                   threads: int = 1) -> tuple[tuple, tuple]:
    """Window covering all bounded attractors found on a coarse grid.

    The union of the attractors' bounding boxes is enlarged by ``inflate``
    times its width and height (half on each side).
    """
    grid = basin_grid(x_range, phi_range, n, n, p, budget, threads)
    lo = np.array([np.inf, np.inf])
    hi = -lo
    table = AttractorTable(p, budget)
    for rec in grid.attractor_table.values():
        if rec.kind == DIVERGENT:
            continue
        pts = rec.representative
        if rec.kind != PERIODIC:
            pts = iterate(NeuronState(*pts[-1]), p, 0, table.cloud_len).states
        lo = np.minimum(lo, pts.min(axis=0))
        hi = np.maximum(hi, pts.max(axis=0))
    if not np.all(np.isfinite(lo)):
        return tuple(x_range), tuple(phi_range)
    pad = 0.5 * inflate * np.maximum(hi - lo, 1e-6)
    lo, hi = lo - pad, hi + pad
    return (float(lo[0]), float(hi[0])), (float(lo[1]), float(hi[1]))


# --------------------------------------------------------------------------
# correlation dimension
# --------------------------------------------------------------------------

def attractor_diameter(points: np.ndarray) -> float:
    pts = np.unique(np.asarray(points, dtype=float), axis=0)
    if len(pts) < 2:
        return 0.0
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        pass  # collinear or too few points: fall back to all points
    best = 0.0
    for s in range(0, len(pts), 1024):
        best = max(best, float(cdist(pts[s:s + 1024], pts).max()))
    return best


def default_radii(points: np.ndarray, n: int = 24, span: tuple = (1e-3, 1.0)) -> np.ndarray:
    return np.geomspace(span[0], span[1], n) * attractor_diameter(points)


def correlation_sum(points: np.ndarray, radii: Sequence[float]) -> np.ndarray:
    """Fraction of distinct point pairs closer than each radius.

    Pair counts are integers from a k-d tree, so the result does not depend
    on point order or on how the count is split up.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        raise ValueError("need at least two points")
    radii = np.asarray(radii, dtype=float)
    tree = cKDTree(pts)
    # count_neighbors uses <=; shrink by one ulp to count strictly-closer pairs
    counts = tree.count_neighbors(tree, np.nextafter(radii, 0.0))
    pairs = (counts - n) // 2
    return pairs / (n * (n - 1) / 2)


def correlation_dimension(points: np.ndarray, radii: Optional[Sequence[float]] = None,
                          fit_range: tuple = (0.0, 0.4)) -> float:
    """Slope of log C(rho) against log rho over a window of the radius grid.

    ``fit_range`` selects the window as fractions of the log-radius span
    (0 is the smallest radius). Returns 0 when every radius sees all pairs
    (a point-like set).
    """
    pts = np.asarray(points, dtype=float)
    if radii is None:
        if attractor_diameter(pts) == 0.0:
            return 0.0
        radii = default_radii(pts)
    radii = np.asarray(radii, dtype=float)
    C = correlation_sum(pts, radii)
    if np.all(C >= 1.0):
        return 0.0
    lr = np.log(radii)
    a = lr[0] + fit_range[0] * (lr[-1] - lr[0])
    b = lr[0] + fit_range[1] * (lr[-1] - lr[0])
    eps = 1e-9 * max(1.0, abs(lr[-1] - lr[0]))
    window = (lr >= a - eps) & (lr <= b + eps) & (C > 0)
    if window.sum() < 3:
        raise ValueError("fewer than 3 radii in the scaling window")
    if np.all(C[window] >= 1.0):
        return 0.0
    return float(np.polyfit(lr[window], np.log(C[window]), 1)[0])


def attractor_points(p: MapParams, n_points: int = 20000, n_transient: int = 5000,
                     s0: NeuronState = NeuronState(0.1, 0.0)) -> np.ndarray:
    orbit = iterate(s0, p, n_transient, n_points)
    if orbit.escaped:
        raise EscapedOrbitError("orbit escaped before the attractor was sampled")
    return orbit.states


def circle_points(n: int = 10000, radius: float = 1.0, seed: int = 0) -> np.ndarray:
    """``n`` points uniform on a circle, angles from the package PRNG."""
    theta = SplitMix64(seed).uniform(0.0, 2 * math.pi, n)
    return radius * np.column_stack([np.cos(theta), np.sin(theta)])
