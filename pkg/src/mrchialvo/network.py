"""Ring-star networks of memristive Chialvo neurons.

Node 0 is the hub. Every node m gets the ring term
``sigma/(2R) * sum_{i=m-R}^{m+R} (x_i - x_m)`` with indices wrapped mod N.
Outer nodes add the star term ``mu (x_m - x_0)``; the hub adds
``mu * sum_i (x_i - x_0)``. Fluxes follow the single-neuron law. All nodes
update synchronously from the previous state.

By default the hub also takes part in the ring coupling (``hub_on_ring``).
Without it the hub is uncoupled whenever ``mu = 0``, so a pure ring can never
synchronise fully.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import ESCAPE_RADIUS, EscapedOrbitError, MapParams, step_arrays
from .rng import SplitMix64

#: Seeds scanned by the figure-reproduction recipes.
DOCUMENTED_SEEDS = tuple(range(1, 21))

SYNCHRONIZED = "synchronized"
UNSYNCHRONIZED = "unsynchronized"
CHIMERA = "chimera"
MULTI_CHIMERA = "multi_chimera"
CLUSTERED = "clustered"
IMPERFECT_SYNC = "imperfect_sync"


@dataclass(frozen=True)
class NetworkConfig:
    map_params: MapParams
    sigma: float = 0.0
    mu: float = 0.0
    n_nodes: int = 100
    r_neighbors: int = 10
    seed: int = 1
    init_low: float = 0.0
    init_high: float = 1.0
    hub_on_ring: bool = True
    zero_flux_init: bool = False
    escape_radius: float = ESCAPE_RADIUS

    def __post_init__(self):
        if self.n_nodes < 3:
            raise ValueError("n_nodes must be >= 3")
        if not 1 <= self.r_neighbors <= (self.n_nodes - 1) / 2:
            raise ValueError("need 1 <= R <= (N-1)/2")
        if not self.init_low <= self.init_high:
            raise ValueError("init_low must be <= init_high")
        for name in ("sigma", "mu", "init_low", "init_high"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def neighbor_index(self) -> np.ndarray:
        offs = np.arange(-self.r_neighbors, self.r_neighbors + 1)
        return (np.arange(self.n_nodes)[:, None] + offs[None, :]) % self.n_nodes


@dataclass(frozen=True)
class NetworkState:
    x: np.ndarray
    phi: np.ndarray
    escaped: bool = False


@dataclass
class NetworkHistory:
    config: NetworkConfig
    x: np.ndarray            # (n_record, N)
    phi: np.ndarray
    escaped: bool = False
    escape_step: Optional[int] = None

    @property
    def final(self) -> np.ndarray:
        return self.x[-1]


def network_step(s: NetworkState, cfg: NetworkConfig, _nbr: Optional[np.ndarray] = None) -> NetworkState:
    if s.escaped:
        return s
    p = cfg.map_params
    x, phi = s.x, s.phi
    nbr = cfg.neighbor_index() if _nbr is None else _nbr
    local, phin = step_arrays(x, phi, p)
    with np.errstate(over="ignore", invalid="ignore"):
        ring = (cfg.sigma / (2 * cfg.r_neighbors)) * (x[nbr] - x[:, None]).sum(axis=1)
        star = cfg.mu * (x - x[0])
        xn = local + ring + star
        hub = local[0] + cfg.mu * np.sum(x - x[0])
        xn[0] = hub + ring[0] if cfg.hub_on_ring else hub
    if not np.all(np.isfinite(xn)) or np.max(np.abs(xn)) > cfg.escape_radius:
        return NetworkState(x, phi, escaped=True)
    return NetworkState(xn, phin)


def initial_state(cfg: NetworkConfig) -> NetworkState:
    """Uniform draws in node order: all x first, then all phi."""
    rng = SplitMix64(cfg.seed)
    x = rng.uniform(cfg.init_low, cfg.init_high, cfg.n_nodes)
    phi = rng.uniform(cfg.init_low, cfg.init_high, cfg.n_nodes)
    if cfg.zero_flux_init:
        phi = np.zeros(cfg.n_nodes)
    return NetworkState(x, phi)


def simulate(cfg: NetworkConfig, n_transient: int, n_record: int,
             initial: Optional[NetworkState] = None) -> NetworkHistory:
    if n_transient < 0 or n_record < 0:
        raise ValueError("counts must be >= 0")
    s = initial_state(cfg) if initial is None else initial
    nbr = cfg.neighbor_index()
    xs = np.empty((n_record, cfg.n_nodes))
    phis = np.empty((n_record, cfg.n_nodes))
    for n in range(n_transient + n_record):
        s = network_step(s, cfg, nbr)
        if s.escaped:
            kept = max(0, n - n_transient)
            return NetworkHistory(cfg, xs[:kept].copy(), phis[:kept].copy(), True, n + 1)
        j = n - n_transient
        if j >= 0:
            xs[j] = s.x
            phis[j] = s.phi
    return NetworkHistory(cfg, xs, phis)


# --------------------------------------------------------------------------
# metrics
# --------------------------------------------------------------------------

def _window_x(history) -> np.ndarray:
    if isinstance(history, NetworkHistory):
        if history.escaped:
            raise EscapedOrbitError("history escaped")
        history = history.x
    x = np.atleast_2d(np.asarray(history, dtype=float))
    if x.size == 0:
        raise ValueError("empty history window")
    return x


def sync_error(history) -> float:
    """Time average of the population standard deviation of x."""
    x = _window_x(history)
    return float(np.mean(np.std(x, axis=1)))


@dataclass
class CoherenceProfile:
    local_std: np.ndarray
    coherent: np.ndarray
    groups: list             # (start, end) inclusive spans; end < start wraps around
    incoherent_fraction: float

    @property
    def coherent_groups(self) -> int:
        return len(self.groups)


def _runs(mask: np.ndarray) -> list[tuple[int, int, int]]:
    """Maximal runs of True on a ring as inclusive (start, end, length) triples."""
    n = len(mask)
    if mask.all():
        return [(0, n - 1, n)]
    if not mask.any():
        return []
    shift = int(np.flatnonzero(~mask)[0])      # start scanning just after a False
    rolled = np.roll(mask, -shift)
    runs, i = [], 0
    while i < n:
        if rolled[i]:
            j = i
            while j + 1 < n and rolled[j + 1]:
                j += 1
            runs.append(((i + shift) % n, (j + shift) % n, j - i + 1))
            i = j + 1
        else:
            i += 1
    return sorted(runs)


def coherence_profile(history, window_radius: int = 2, tol: float = 0.01,
                      min_group: int = 3) -> CoherenceProfile:
    """Local spatial coherence of each node, averaged over the window.

    Node m is coherent when the time-averaged std of x over nodes
    m-window_radius .. m+window_radius (wrapped) is below ``tol``. Runs of at
    least ``min_group`` coherent nodes form groups.
    """
    x = _window_x(history)
    if x.shape[0] < 10:
        raise ValueError("need at least 10 snapshots")
    n = x.shape[1]
    offs = np.arange(-window_radius, window_radius + 1)
    idx = (np.arange(n)[:, None] + offs[None, :]) % n
    local = np.std(x[:, idx], axis=2).mean(axis=0)
    coherent = local < tol
    groups = [(a, b) for a, b, ln in _runs(coherent) if ln >= min_group]
    return CoherenceProfile(local, coherent, groups, float(1.0 - coherent.mean()))


def cluster_count(snapshot, tol: float = 0.05) -> tuple[int, np.ndarray]:
    """Single-linkage clusters of the node values at gap tolerance ``tol``."""
    v = np.sort(np.asarray(snapshot, dtype=float).ravel())
    if v.size == 0:
        return 0, np.empty(0)
    cuts = np.flatnonzero(np.diff(v) > tol) + 1
    parts = np.split(v, cuts)
    return len(parts), np.array([part.mean() for part in parts])


def deviating_nodes(history, factor: float = 3.0) -> np.ndarray:
    """Nodes whose mean distance from the population median exceeds ``factor`` * sync_error."""
    x = _window_x(history)
    err = sync_error(x)
    if err == 0.0:
        return np.empty(0, dtype=int)
    dev = np.abs(x - np.median(x, axis=1, keepdims=True)).mean(axis=0)
    return np.flatnonzero(dev > factor * err)


def classify_pattern(sync_err: float, profile: CoherenceProfile, clusters: int,
                     n_deviating: int = 0, sync_tol: float = 1e-3,
                     imperfect_tol: float = 0.05, deviating_max: float = 0.05) -> str:
    """Name the spatiotemporal state from its metrics.

    Checks run in this order: synchronized, imperfect synchronisation (small
    error carried by a few isolated nodes), clustered, chimera, multi-chimera,
    and unsynchronized otherwise.
    """
    n = len(profile.coherent)
    inc = profile.incoherent_fraction
    if sync_err < sync_tol:
        return SYNCHRONIZED
    if sync_err < imperfect_tol and 0 < n_deviating <= deviating_max * n:
        return IMPERFECT_SYNC
    if clusters >= 2 and inc < 0.05:
        return CLUSTERED
    if profile.coherent_groups == 1 and 0.05 < inc < 0.95:
        return CHIMERA
    if profile.coherent_groups >= 2 and inc > 0.0:
        return MULTI_CHIMERA
    return UNSYNCHRONIZED


@dataclass
class SpatiotemporalReport:
    sync_error: float
    coherence: np.ndarray = field(repr=False)
    coherent_groups: int
    group_spans: list
    incoherent_fraction: float
    clusters: int
    cluster_levels: np.ndarray = field(repr=False)
    n_deviating: int
    classification: str


def analyze(history, window_radius: int = 2, tol: float = 0.01,
            cluster_tol: float = 0.05) -> SpatiotemporalReport:
    x = _window_x(history)
    err = sync_error(x)
    prof = coherence_profile(x, window_radius, tol)
    n_cl, levels = cluster_count(x[-1], cluster_tol)
    n_dev = len(deviating_nodes(x))
    label = classify_pattern(err, prof, n_cl, n_dev)
    return SpatiotemporalReport(err, prof.local_std, prof.coherent_groups, prof.groups,
                                prof.incoherent_fraction, n_cl, levels, n_dev, label)
