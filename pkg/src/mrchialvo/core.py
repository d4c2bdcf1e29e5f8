"""Discrete cosine memristor and the memristive reduced Chialvo neuron map.

The memristor::

    i_n       = cos(pi * phi_n) * v_n
    phi_{n+1} = h * k1 * v_n - k2 * phi_n

The neuron map (membrane potential x, memristor flux phi)::

    x'   = x**2 * exp(r - x) + k0 + k * x * cos(pi * phi)
    phi' = k1 * x - k2 * phi
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

#: |x| beyond this counts as divergence to infinity.
ESCAPE_RADIUS = 1e6


@dataclass(frozen=True)
class MapParams:
    k0: float
    k1: float
    k2: float
    k: float
    r: float
    h: float = 1.0

    def __post_init__(self):
        for name in ("k0", "k1", "k2", "k", "r", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"MapParams.{name} must be finite, got {value!r}")

    def with_(self, **changes) -> "MapParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return {"k0": self.k0, "k1": self.k1, "k2": self.k2, "k": self.k, "r": self.r, "h": self.h}


@dataclass(frozen=True)
class NeuronState:
    x: float
    phi: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.phi])


@dataclass(frozen=True)
class DriveSignal:
    """Sinusoidal voltage ``v_n = v_m sin(omega n)`` for ``n = 0 .. n_steps-1``."""

    v_m: float
    omega: float
    n_steps: int

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if not (math.isfinite(self.v_m) and math.isfinite(self.omega)):
            raise ValueError("v_m and omega must be finite")

    def samples(self) -> np.ndarray:
        return self.v_m * np.sin(self.omega * np.arange(self.n_steps))


@dataclass(frozen=True)
class Orbit:
    """Post-transient trajectory; ``states`` is an (n, 2) array of (x, phi)."""

    states: np.ndarray
    transient_len: int
    escaped: bool = False
    escape_index: Optional[int] = None

    @property
    def x(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def phi(self) -> np.ndarray:
        return self.states[:, 1]

    def __len__(self):
        return len(self.states)


class EscapedOrbitError(ValueError):
    """Raised by analyses that need a bounded orbit."""


def memristance(phi):
    """Memconductance ``W(phi) = cos(pi phi)``."""
    return np.cos(np.pi * phi)


def memristor_step(v: float, phi: float, p: MapParams) -> tuple[float, float]:
    """One memristor update; returns ``(current, next_flux)``."""
    i = math.cos(math.pi * phi) * v
    return i, p.h * p.k1 * v - p.k2 * phi


@dataclass
class PHLTrace:
    """Memristor response to a sinusoidal drive.

    ``area`` is the signed shoelace area of the (v, i) loop and
    ``enclosed_area`` the total area of the bounded regions the loop encloses.
    Both are taken over one drive period after a 10-period transient, with the
    samples ordered by drive phase (``omega n mod 2 pi``); at non-integer periods
    this is the only ordering in which the discrete samples trace a closed curve.
    """

    v: np.ndarray
    i: np.ndarray
    phi: np.ndarray
    area: float
    enclosed_area: float
    loop_v: np.ndarray = field(repr=False)
    loop_i: np.ndarray = field(repr=False)


def phl_trace(drive: DriveSignal, p: MapParams, phi0: float = 0.0,
              transient_periods: int = 10) -> PHLTrace:
    v = drive.samples()
    i = np.empty_like(v)
    phi = np.empty_like(v)
    f = phi0
    for n, vn in enumerate(v):
        phi[n] = f
        i[n], f = memristor_step(float(vn), f, p)

    start = 0
    if drive.omega != 0.0:
        start = int(math.ceil(transient_periods * 2 * math.pi / abs(drive.omega)))
    if start >= len(v) - 2:
        start = 0
    phase = np.mod(drive.omega * np.arange(len(v)), 2 * np.pi)[start:]
    order = np.argsort(phase, kind="stable")
    loop_v, loop_i = v[start:][order], i[start:][order]
    return PHLTrace(v=v, i=i, phi=phi,
                    area=shoelace_area(loop_v, loop_i),
                    enclosed_area=enclosed_area(loop_v, loop_i),
                    loop_v=loop_v, loop_i=loop_i)


def shoelace_area(xs: np.ndarray, ys: np.ndarray) -> float:
    """Signed area of the closed polygon through the given vertices."""
    if len(xs) < 3:
        return 0.0
    return 0.5 * float(np.sum(xs * np.roll(ys, -1) - np.roll(xs, -1) * ys))


def enclosed_area(xs: np.ndarray, ys: np.ndarray) -> float:
    """Total area of the bounded faces cut out by a (self-intersecting) closed curve."""
    from shapely.geometry import LineString
    from shapely.ops import polygonize, unary_union

    if len(xs) < 3 or np.ptp(ys) == 0.0 or np.ptp(xs) == 0.0:
        return 0.0
    ring = np.column_stack([xs, ys])
    ring = np.vstack([ring, ring[:1]])
    faces = polygonize(unary_union(LineString(ring)))
    return float(sum(face.area for face in faces))


def step(s: NeuronState, p: MapParams, escape_radius: float = ESCAPE_RADIUS) -> Optional[NeuronState]:
    """Apply the map once. Returns ``None`` if the new state escapes."""
    x, phi = s.x, s.phi
    try:
        xn = x * x * math.exp(p.r - x) + p.k0 + p.k * x * math.cos(math.pi * phi)
    except OverflowError:
        return None
    if not math.isfinite(xn) or abs(xn) > escape_radius:
        return None
    return NeuronState(xn, p.k1 * x - p.k2 * phi)


def step_arrays(x: np.ndarray, phi: np.ndarray, p: MapParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized map; non-finite results are left for the caller to flag."""
    with np.errstate(over="ignore", invalid="ignore"):
        xn = x * x * np.exp(p.r - x) + p.k0 + p.k * x * np.cos(np.pi * phi)
    return xn, p.k1 * x - p.k2 * phi


def reduced_chialvo(x: float, r: float, k0: float) -> float:
    """Reduced 1-D Chialvo map ``x' = x^2 e^(r-x) + k0`` (the k = 0 limit)."""
    return x * x * math.exp(r - x) + k0


def iterate(s0: NeuronState, p: MapParams, n_transient: int, n_record: int,
            escape_radius: float = ESCAPE_RADIUS) -> Orbit:
    """Run ``n_transient`` unrecorded steps, then record ``n_record`` states.

    On escape the orbit is cut short: ``escape_index`` counts steps from ``s0``
    (1-based step number of the escaping update) and ``states`` holds whatever
    finite post-transient states were recorded before it.
    """
    if n_transient < 0 or n_record < 0:
        raise ValueError("counts must be >= 0")
    x, phi = float(s0.x), float(s0.phi)
    if not (math.isfinite(x) and math.isfinite(phi)):
        raise ValueError("initial state must be finite")
    out = np.empty((n_record, 2))
    k0, k1, k2, k, r = p.k0, p.k1, p.k2, p.k, p.r
    exp, cos, pi = math.exp, math.cos, math.pi
    total = n_transient + n_record
    for n in range(total):
        try:
            xn = x * x * exp(r - x) + k0 + k * x * cos(pi * phi)
        except OverflowError:
            xn = math.inf
        if not math.isfinite(xn) or abs(xn) > escape_radius:
            kept = max(0, n - n_transient)
            return Orbit(out[:kept].copy(), n_transient, escaped=True, escape_index=n + 1)
        phi = k1 * x - k2 * phi
        x = xn
        if n >= n_transient:
            out[n - n_transient, 0] = x
            out[n - n_transient, 1] = phi
    return Orbit(out, n_transient)


def default_spike_threshold(x: np.ndarray) -> float:
    """Midpoint between the 10th and 90th percentiles of the trace."""
    lo, hi = np.percentile(x, [10, 90])
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class FiringStats:
    spike_count: int
    inter_spike_intervals: np.ndarray
    isi_cv: float
    threshold: float


def firing_stats(orbit: Orbit, threshold: Optional[float] = None) -> FiringStats:
    """Spike count and inter-spike-interval statistics of an orbit's x-trace.

    A spike is an upward crossing of ``threshold`` (``x[n-1] < thr <= x[n]``).
    """
    if orbit.escaped:
        raise EscapedOrbitError("cannot compute firing statistics on an escaped orbit")
    if len(orbit) == 0:
        raise ValueError("empty orbit")
    x = orbit.x
    thr = default_spike_threshold(x) if threshold is None else float(threshold)
    if threshold is None and np.ptp(x) <= 1e-9 * max(1.0, float(np.abs(x).max())):
        # a flat trace has no spikes; its percentile midpoint sits inside rounding noise
        return FiringStats(0, np.empty(0), 0.0, thr)
    up = np.flatnonzero((x[:-1] < thr) & (x[1:] >= thr)) + 1
    isi = np.diff(up).astype(float)
    if len(up) < 2 or isi.mean() == 0:
        cv = 0.0
    else:
        cv = float(isi.std() / isi.mean())
    return FiringStats(int(len(up)), isi, cv, thr)


# firing-pattern recipes (k0=0.1, k1=0.1, k2=0.2 throughout)
FIRING_PATTERNS = {
    "regular_spiking": dict(k=-0.5, r=0.2),
    "tonic_spiking": dict(k=-0.5, r=0.6),
    "chaotic_bursting": dict(k=-0.5, r=2.2),
    "periodic_bursting": dict(k=0.1, r=3.9),
    "phasic_bursting": dict(k=1.0, r=1.4),
}


def firing_params(pattern: str) -> MapParams:
    if pattern not in FIRING_PATTERNS:
        raise KeyError(f"unknown firing pattern {pattern!r}; choose from {sorted(FIRING_PATTERNS)}")
    return MapParams(k0=0.1, k1=0.1, k2=0.2, **FIRING_PATTERNS[pattern])
