"""Acceptance gate.

Each test carries ``@pytest.mark.criterion(n, title)``; the terminal summary
prints one PASS/FAIL line per criterion (see conftest.py). Run directly with
``python tests/test_acceptance.py`` or through pytest.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from ns_cases import random_ns_points
from oracles import fd_jacobian, fd_modulus_derivative, network_step_loops
from mrchialvo.attractors import (
    CHAOTIC,
    DIVERGENT,
    PERIODIC,
    Budget,
    attractor_points,
    circle_points,
    classify_attractor,
    correlation_dimension,
)
from mrchialvo.bifurcation import (
    detect_bubbles,
    forward_backward,
    hysteresis_mask,
    ns_first_lyapunov,
    ns_modulus_derivative,
    ns_self_consistent,
)
from mrchialvo.cli import EXIT_ESCAPE, EXIT_OK, main
from mrchialvo.core import DriveSignal, MapParams, NeuronState, memristor_step, phl_trace, step, step_arrays
from mrchialvo.fixed_points import find_fixed_points, jacobian, theorem1_check
from mrchialvo.io import read_table
from mrchialvo.network import NetworkConfig, NetworkState, initial_state, network_step
from mrchialvo.presets import NS_CASES, TABLE3_DIMENSION, TABLE3_K, preset

crit = pytest.mark.criterion

# --------------------------------------------------------------------------
# 1. reference fixed-point rows
# --------------------------------------------------------------------------

TABLE1_ROWS = {
    2.0: [((0.00972, 0.00324), (0.04159, -0.5), "stable"),
          ((0.1659, 0.0553), (1.8, -0.5), "saddle"),
          ((3.296, 1.098), (complex(-0.78, 0.275), complex(-0.78, -0.275)), "stable")],
    2.8: [((0.01082, 0.0036), (0.25, -0.5), "stable"),
          ((0.06033, 0.02), (1.712, -0.5), "saddle"),
          ((4.279, 1.426), (-1.609, -1.0896), "unstable")],
    3.0: [((0.01146, 0.0038), (0.352, -0.5), "stable"),
          ((0.04601, 0.0153), (1.6248, -0.5), "saddle"),
          ((4.507, 1.5), (-2.046, -0.9), "saddle")],
    5.0: [((6.869, 2.289), (-5.395, -0.325), "saddle")],
}
CLASS_NAMES = {"stable": "stable", "saddle": "saddle", "unstable": "repeller"}


def _table1(r):
    return find_fixed_points(MapParams(k0=0.01, k1=0.5, k2=0.5, k=-0.1, r=r))


def _eig_error(got, want):
    return min(max(abs(complex(g) - complex(w)) for g, w in zip(perm, want))
               for perm in itertools.permutations(got))


@crit(1, "reference fixed points")
@pytest.mark.parametrize("r", sorted(TABLE1_ROWS))
def test_c1_roots_and_classes(r):
    fps = _table1(r)
    rows = TABLE1_ROWS[r]
    assert len(fps) == len(rows)
    for fp, ((x, phi), _, cls) in zip(fps, rows):
        assert abs(fp.x_star - x) < 5e-3 and abs(fp.phi_star - phi) < 5e-3
        assert fp.stability.kind == CLASS_NAMES[cls]


@crit(1, "reference fixed points")
@pytest.mark.parametrize("r", sorted(TABLE1_ROWS))
def test_c1_eigenvalues(r):
    errors = [_eig_error(fp.stability.eigenvalues, lam) for fp, (_, lam, _) in zip(_table1(r), TABLE1_ROWS[r])]
    assert max(errors) < 5e-3, f"eigenvalue errors {np.round(errors, 5)}"


@crit(1, "reference fixed points")
def test_c1_runtime():
    t0 = time.perf_counter()
    for r in TABLE1_ROWS:
        _table1(r)
    assert time.perf_counter() - t0 < 1.0


# --------------------------------------------------------------------------
# 2-4. fixed points
# --------------------------------------------------------------------------

def _draws(n, seed, low, high):
    rng = np.random.default_rng(seed)
    return [MapParams(*map(float, rng.uniform(low, high))) for _ in range(n)]


@crit(2, "flux identity at fixed points")
def test_c2_flux_identity():
    checked = 0
    for p in _draws(1000, 2, [-1, -1, -0.9, -1, -1], [2, 1, 2, 1, 4]):
        for fp in find_fixed_points(p):
            assert abs(fp.phi_star - p.k1 * fp.x_star / (1 + p.k2)) < 1e-12
            assert abs(p.k1 * fp.x_star - p.k2 * fp.phi_star - fp.phi_star) < 1e-12
            checked += 1
    assert checked >= 1000


@crit(3, "unique fixed point under the uniqueness hypotheses")
def test_c3_uniqueness():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    for _ in range(200):
        n_cap = int(rng.integers(2, 11))
        m1 = n_cap + 2.0
        p = MapParams(k0=float(rng.uniform(0, n_cap)), k1=float(rng.uniform(0, 1)),
                      k2=float(rng.uniform(4 * math.pi, 40)), k=float(rng.uniform(-1, 1) / m1),
                      r=float(rng.uniform(-5, 0)))
        ok, bounds, _ = theorem1_check(p, n_cap)
        assert ok
        fps = find_fixed_points(p, 0.0, m1)
        assert len(fps) == 1
        assert 0 <= fps[0].x_star <= bounds.m1 and 0 <= fps[0].phi_star <= bounds.m2
    assert time.perf_counter() - t0 < 10.0


@crit(4, "Jacobian against finite differences")
def test_c4_jacobian():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(100):
        x, phi = rng.uniform(-1, 8), rng.uniform(-3, 3)
        prm = tuple(map(float, rng.uniform([-1, -1, -1, -1, -1], [2, 1, 1, 1, 4])))
        J = jacobian(NeuronState(x, phi), MapParams(*prm))
        worst = max(worst, float(np.max(np.abs(J - fd_jacobian(x, phi, prm)))))
    assert worst < 1e-5


# --------------------------------------------------------------------------
# 5-6. Neimark-Sacker
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def ns_points():
    return random_ns_points(20)


@crit(5, "NS self-consistency and transversality")
def test_c5_unit_modulus(ns_points):
    assert len(ns_points) == 20
    for q, fp, rep in ns_points:
        assert rep.valid
        assert max(abs(abs(l) - 1.0) for l in fp.stability.eigenvalues) < 1e-8


@crit(5, "NS self-consistency and transversality")
def test_c5_transversality(ns_points):
    for q, fp, rep in ns_points:
        fd = fd_modulus_derivative(fp.x_star, fp.phi_star, (q.k0, q.k1, q.k2, q.k, q.r))
        assert abs(ns_modulus_derivative(fp, q) - fd) <= 1e-3 * abs(fd)


@crit(6, "supercritical NS gives an attracting invariant circle")
def test_c6_invariant_circle():
    budget = Budget(transient=50000, tail=2000, p_max=50)
    successes = 0
    for p, x_guess in NS_CASES:
        q, fp, _ = ns_self_consistent(p, x_guess)
        rep = ns_first_lyapunov(q, fp)
        if not rep.theta < 0:
            continue
        beyond = q.with_(k=q.k + rep.supercritical_side * 1e-3)
        rec = classify_attractor(NeuronState(fp.x_star + 1e-2, fp.phi_star), beyond, budget)
        if rec.kind not in (DIVERGENT, PERIODIC) and abs(rec.lyap_max) <= 0.01:
            successes += 1
    assert successes >= 3


# --------------------------------------------------------------------------
# 7. hysteresis and bubbles
# --------------------------------------------------------------------------

@crit(7, "hysteresis and chaotic bubble along r")
def test_c7_hysteresis():
    pr = preset("fig7")
    t0 = time.perf_counter()
    fwd, bwd = forward_backward(pr["map"], "r", 2.5, 3.1, 600, pr["transient"], pr["record"])
    mask = hysteresis_mask(fwd, bwd)
    bubbles = detect_bubbles(fwd) + detect_bubbles(bwd)
    elapsed = time.perf_counter() - t0
    assert mask.mean() >= 0.01, f"disagreement on {mask.mean():.3%} of steps"
    assert bubbles
    assert elapsed < 30.0


# --------------------------------------------------------------------------
# 8. pinched hysteresis
# --------------------------------------------------------------------------

def _area(v_m, omega):
    return phl_trace(DriveSignal(v_m, omega, 2000), MapParams(0, 0.7, 0.2, 0, 0)).enclosed_area


@crit(8, "pinched hysteresis loops")
def test_c8_pinching():
    p = MapParams(0, 0.7, 0.2, 0, 0)
    for phi in np.linspace(-50, 50, 1001):
        assert memristor_step(0.0, float(phi), p)[0] == 0.0
    for v_m, omega in [(0.6, 3.7), (0.8, 3.7), (1.0, 3.7), (1.0, 4.5), (1.0, 5.5)]:
        tr = phl_trace(DriveSignal(v_m, omega, 2000), p)
        assert np.all(tr.i[tr.v == 0.0] == 0.0)


@crit(8, "pinched hysteresis loops")
def test_c8_area_grows_with_amplitude():
    areas = [_area(v, 3.7) for v in preset("fig5a")["v_m_grid"]]
    assert areas[0] < areas[1] < areas[2], areas


@crit(8, "pinched hysteresis loops")
def test_c8_area_shrinks_with_frequency():
    areas = [_area(1.0, w) for w in preset("fig5b")["omega_grid"]]
    assert areas[0] > areas[1] > areas[2], areas


# --------------------------------------------------------------------------
# 9, 12, 14. CLI runs shared between criteria
# --------------------------------------------------------------------------

def _run(out, *argv):
    t0 = time.perf_counter()
    code = main([*argv, "--out", str(out)])
    return code, time.perf_counter() - t0


@pytest.fixture(scope="module")
def basin_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("basin")
    res = {}
    for threads in (8, 1):
        out = base / f"t{threads}"
        res[threads] = (out, *_run(out, "basin", "--preset", "fig10", "--nx", "300", "--nphi", "300",
                                   "--threads", str(threads)))
    return res


@pytest.fixture(scope="module")
def fig15_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("fig15")
    res = {}
    for row in ("row3", "row1"):
        for threads in (8, 1):
            out = base / f"{row}-t{threads}"
            res[row, threads] = (out, *_run(out, "network", "--preset", f"fig15-{row}", "--seeds", "1-20",
                                            "--threads", str(threads)))
    return res


@crit(9, "multistability: four basin classes")
def test_c9_basin_classes(basin_runs):
    out, code, elapsed = basin_runs[8]
    assert code == EXIT_OK
    att = read_table(out / "attractors.csv")
    used = [row for row in att.rows if row[4] > 0]
    kinds = sorted(row[1] for row in used)
    assert len(used) == 4, kinds
    assert kinds.count(DIVERGENT) == 1 and kinds.count("periodic(5)") == 1
    chaotic = [row for row in used if row[1] == CHAOTIC]
    assert len(chaotic) == 1 and chaotic[0][3] > 0.01
    other = [row for row in used if row[1] not in (DIVERGENT, "periodic(5)", CHAOTIC)]
    assert len(other) == 1 and other[0][3] <= 0.01
    assert len(read_table(out / "basin.csv").rows) == 300 * 300
    assert elapsed < 300.0


@crit(12, "network regimes along sigma")
def test_c12_sync_regimes(fig15_runs):
    strong = read_table(fig15_runs["row3", 8][0] / "network_report.csv")
    weak = read_table(fig15_runs["row1", 8][0] / "network_report.csv")
    assert strong.column("seed") == list(range(1, 21)) == weak.column("seed")
    good = sum(not e1 and not e2 and s1 < 1e-3 and s2 > 0.05
               for e1, s1, e2, s2 in zip(strong.column("escaped"), strong.column("sync_error"),
                                         weak.column("escaped"), weak.column("sync_error")))
    assert good >= 15, f"{good}/20 seeds"
    assert fig15_runs["row3", 8][2] + fig15_runs["row1", 8][2] < 60.0


@crit(14, "thread-count independence")
@pytest.mark.parametrize("name", ["basin.csv", "attractors.csv"])
def test_c14_basin_bytes(basin_runs, name):
    assert (basin_runs[8][0] / name).read_bytes() == (basin_runs[1][0] / name).read_bytes()


@crit(14, "thread-count independence")
@pytest.mark.parametrize("row", ["row1", "row3"])
@pytest.mark.parametrize("name", ["network_report.csv", "network_final.csv"])
def test_c14_network_bytes(fig15_runs, row, name):
    assert (fig15_runs[row, 8][0] / name).read_bytes() == (fig15_runs[row, 1][0] / name).read_bytes()


# --------------------------------------------------------------------------
# 10. correlation dimension
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def dimensions():
    t0 = time.perf_counter()
    base = preset("table3")["map"]
    dims = [correlation_dimension(attractor_points(base.with_(k=k))) for k in TABLE3_K]
    circle = correlation_dimension(circle_points(10000))
    return dims, circle, time.perf_counter() - t0


@crit(10, "correlation dimension")
def test_c10_reference_values(dimensions):
    dims, _, _ = dimensions
    for d, ref in zip(dims, TABLE3_DIMENSION):
        assert abs(d - ref) <= 0.15, dims


@crit(10, "correlation dimension")
def test_c10_increasing(dimensions):
    dims = dimensions[0]
    assert all(a < b for a, b in zip(dims, dims[1:])), dims


@crit(10, "correlation dimension")
def test_c10_circle_and_runtime(dimensions):
    _, circle, elapsed = dimensions
    assert abs(circle - 1.0) <= 0.05
    assert elapsed < 120.0


# --------------------------------------------------------------------------
# 11. network reductions
# --------------------------------------------------------------------------

STAR = MapParams(k0=2.0, k1=0.3, k2=0.5, k=-0.5, r=1.2)


@crit(11, "network reductions")
def test_c11_zero_coupling():
    cfg = NetworkConfig(STAR, sigma=0.0, mu=0.0, n_nodes=100, r_neighbors=10, seed=1)
    s = initial_state(cfg)
    x, phi = s.x.copy(), s.phi.copy()
    for _ in range(500):
        s = network_step(s, cfg)
        x, phi = step_arrays(x, phi, STAR)
        assert np.array_equal(s.x, x) and np.array_equal(s.phi, phi)


@crit(11, "network reductions")
def test_c11_sync_manifold():
    cfg = NetworkConfig(STAR, sigma=0.3, mu=0.001, n_nodes=100, r_neighbors=10)
    s = NetworkState(np.full(100, 0.4), np.full(100, 0.1))
    for _ in range(500):
        x, phi = step_arrays(s.x, s.phi, STAR)
        s = network_step(s, cfg)
        assert np.all(s.x == s.x[0]) and np.all(s.phi == s.phi[0])
        assert np.array_equal(s.x, x) and np.array_equal(s.phi, phi)


@crit(11, "network reductions")
def test_c11_brute_force_oracle():
    prm = (STAR.k0, STAR.k1, STAR.k2, STAR.k, STAR.r)
    for sigma, mu, R in [(0.1, 0.0, 1), (0.15, 0.002, 2), (0.05, 0.01, 3)]:
        cfg = NetworkConfig(STAR, sigma=sigma, mu=mu, n_nodes=7, r_neighbors=R, seed=5)
        s = initial_state(cfg)
        for _ in range(100):
            x, phi = network_step_loops(s.x, s.phi, prm, sigma, mu, R)
            s = network_step(s, cfg)
            assert not s.escaped
            assert np.max(np.abs(s.x - x)) <= 1e-12 and np.max(np.abs(s.phi - phi)) <= 1e-12


# --------------------------------------------------------------------------
# 13. clusters and multi-chimera
# --------------------------------------------------------------------------

@pytest.fixture(scope="module")
def fig17_18(tmp_path_factory):
    base = tmp_path_factory.mktemp("fig17")
    res = {}
    for key, argv in {"five": ("--preset", "fig17-rows", "--row", "2"),
                      "six": ("--preset", "fig17-rows", "--row", "3"),
                      "multi": ("--preset", "fig18")}.items():
        out = base / key
        code, _ = _run(out, "network", *argv, "--seeds", "1-20", "--cluster-tol", "0.05")
        assert code in (EXIT_OK, EXIT_ESCAPE)
        res[key] = read_table(out / "network_report.csv")
    return res


@crit(13, "cluster and multi-chimera states")
def test_c13_five_clusters(fig17_18):
    t = fig17_18["five"]
    counts = [c for c, e in zip(t.column("clusters"), t.column("escaped")) if not e]
    assert 5 in counts, counts


@crit(13, "cluster and multi-chimera states")
def test_c13_six_clusters(fig17_18):
    t = fig17_18["six"]
    counts = [c for c, e in zip(t.column("clusters"), t.column("escaped")) if not e]
    assert 6 in counts, counts


@crit(13, "cluster and multi-chimera states")
def test_c13_multi_chimera(fig17_18):
    t = fig17_18["multi"]
    hits = [s for s, e, g, f in zip(t.column("seed"), t.column("escaped"), t.column("coherent_groups"),
                                    t.column("incoherent_fraction"))
            if not e and g >= 2 and 0 < f < 1]
    assert hits


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v", "-p", "no:cacheprovider"]))
