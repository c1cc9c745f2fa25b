"""Acceptance suite: one test per criterion, each printing a pass line.

The asymptotic almost-sure bounds cannot be reproduced as exact numbers at
desk scale, so the Monte Carlo criteria are property-based (exceed-fraction
thresholds, trend and stability checks) plus seed-pinned regression values
recorded on the first calibrated run.  Run with ``-s`` to see the pass
lines inline.
"""

import math
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from copula_lab.cli import main as cli_main
from copula_lab.copulas import ClaytonCopula, FGMCopula, IndependenceCopula
from copula_lab.deviation import (
    bandwidth_grid,
    confidence_band,
    rn,
    verify_envelope,
    verify_variance_bound,
)
from copula_lab.empirical import (
    PairedSample,
    PseudoObservations,
    ecdf_eval,
    empirical_copula,
    empirical_copula_grid,
    empirical_copula_process,
    generalized_inverse,
    pseudo_observations,
    uniform_empirical_cdf,
    uniform_empirical_cdf_grid,
)
from copula_lab.estimators import (
    SurfaceGrid,
    estimate_on_grid,
    general_estimate,
    interior_lattice,
    local_linear_estimate,
    make_estimator,
    mirror_reflection_estimate,
    mr_partial,
    mirror_reflect_points,
    transformation_estimate,
    transformation_surface,
)
from copula_lab.kernels import (
    boundary_moments,
    get_kernel,
    get_transformation,
    local_linear_cdf,
    local_linear_kernel,
    smoothed_marginal,
)
from copula_lab.simulate import replicate_rng, simulate_deviations

EP = get_kernel("epanechnikov")
ID = get_transformation("identity")
SEED = 42
THREADS = None  # honor COPULA_LAB_THREADS / default

COPULAS = {
    "independence": IndependenceCopula(),
    "clayton(2)": ClaytonCopula(2.0),
    "fgm(0.5)": FGMCopula(0.5),
}

# Seed-pinned Monte Carlo regression values (criterion 6), recorded on the
# first calibrated run: median over replicates of the max-over-h normalized
# closeness statistic, transformation estimator on the independence copula,
# M=50, seed=42.
CLOSENESS_PINNED = {2000: 6.919605917947543, 8000: 10.793355289814098}


def _report(criterion, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"criterion {criterion}: PASS{suffix}")


def test_criterion_01_hand_oracle_suite():
    start = time.monotonic()

    # ECDF and generalized inverse.
    assert ecdf_eval([1, 2, 3], 0) == 0.0
    assert abs(ecdf_eval([1, 2, 3], 2) - 2 / 3) <= 1e-9
    assert ecdf_eval([1, 2, 3], 3) == 1.0
    assert generalized_inverse([1, 2, 3], 0.5) == 2.0
    assert generalized_inverse([1, 2, 3], 1.0) == 3.0
    assert generalized_inverse([1, 2, 3], 0.1) == 1.0

    # Pseudo-observations.
    sample = PairedSample([1, 2, 3], [1, 3, 2])
    ps = pseudo_observations(sample)
    assert_allclose(ps.us, [0.25, 0.5, 0.75], atol=1e-9)
    assert_allclose(ps.vs, [0.25, 0.75, 0.5], atol=1e-9)

    # Empirical copula and its process.
    assert abs(empirical_copula(sample, 2 / 3, 2 / 3) - 1 / 3) <= 1e-9
    assert abs(empirical_copula(sample, 1 / 3, 1 / 3) - 1 / 3) <= 1e-9
    assert empirical_copula(sample, 1.0, 1.0) == 1.0
    got = empirical_copula_process(sample, IndependenceCopula(), 2 / 3, 2 / 3)
    assert abs(got - (-math.sqrt(3) / 9)) <= 1e-9

    # Boundary moments a_j.
    assert abs(boundary_moments(EP, 0.5, 0.25, 0) - 1.0) <= 1e-9
    assert abs(boundary_moments(EP, 0.5, 0.25, 1)) <= 1e-9
    assert abs(boundary_moments(EP, 0.5, 0.25, 2) - 0.2) <= 1e-9
    assert abs(boundary_moments(EP, 0.0, 0.5, 0) - 0.5) <= 1e-9
    assert abs(boundary_moments(EP, 0.0, 0.5, 1) + 0.1875) <= 1e-9
    assert abs(boundary_moments(EP, 0.0, 0.5, 2) - 0.1) <= 1e-9

    # Local-linear kernel at the left boundary; closed-form arithmetic.
    expected = 0.5625 * (0.1 - 0.1875 * 0.5) / (0.5 * 0.1 - 0.1875**2)
    assert abs(local_linear_kernel(EP, 0.0, 0.5, -0.5) - expected) <= 1e-9
    assert abs(local_linear_cdf(EP, 0.0, 0.5, 0.0) - 1.0) <= 1e-9

    # Integrated kernel and smoothed marginal.
    assert abs(EP.cdf(0.5) - 0.84375) <= 1e-9
    assert abs(smoothed_marginal(EP, [1, 2, 3], 0.5, 2.0) - 0.5) <= 1e-9

    # Transformation estimates.
    assert abs(transformation_estimate(EP, ID, ps, 0.1, 0.5, 0.5) - 1 / 3) <= 1e-9
    one = PseudoObservations([0.5], [0.5], "rescaled_rank")
    assert abs(general_estimate(EP, ID, one, 0.3, 0.5, 0.5) - 0.25) <= 1e-9
    smooth = get_transformation("smoothstep")
    assert abs(smooth.forward(0.5) - 0.5) <= 1e-9
    assert abs(smooth.derivative(0.5) - 1.5) <= 1e-9
    assert abs(general_estimate(EP, smooth, one, 0.3, 0.5, 0.5) - 0.25) <= 1e-9

    # Mirror reflection.
    assert abs(mirror_reflection_estimate(EP, one, 0.25, 1.0, 1.0) - 1.0) <= 1e-9
    pt = PseudoObservations([0.25], [0.5], "rescaled_rank")
    refl = mirror_reflect_points(pt)
    assert abs(mr_partial(EP, refl[3], 0.1, 0.0, 0.0) - 1.0) <= 1e-9

    # R_n and the bandwidth grid endpoints.
    assert abs(rn(1000) - math.sqrt(1000 / (2 * math.log(math.log(1000))))) <= 1e-9
    assert abs(rn(1000) - 16.0848) <= 5e-4
    grid = bandwidth_grid(1000, c=1.0, bn="invlog", count=8)
    assert abs(grid.points[0] - math.log(1000) / 1000) <= 1e-9
    assert abs(grid.bn - 1 / math.log(1000)) <= 1e-9

    # kappa and C0 constants.
    assert verify_envelope(EP, ID, probes=64)["kappa"] == 3.25
    assert verify_envelope(get_kernel("uniform"), ID, probes=64)["kappa"] == 2.0
    gii = verify_variance_bound(EP, ID, IndependenceCopula(), 0.05, mc=10_000, seed=0,
                     probe_points=[(0.5, 0.5)])
    assert gii["c0"] == 6.0
    assert abs(gii["c0_times_h"] - 0.3) <= 1e-9

    # Clayton / FGM CDFs and partials.
    assert abs(ClaytonCopula(2.0).cdf(0.5, 0.5) - 7.0 ** (-0.5)) <= 1e-9
    assert abs(ClaytonCopula(2.0).partial_u(0.5, 0.5) - 8.0 * 7.0 ** (-1.5)) <= 1e-9
    assert abs(FGMCopula(0.5).cdf(0.5, 0.5) - 0.28125) <= 1e-9
    assert abs(FGMCopula(0.5).partial_u(0.5, 0.5) - 0.5) <= 1e-9

    # Band halfwidth.
    pts = np.linspace(0.1, 0.9, 5)
    surf = SurfaceGrid(pts, pts, np.outer(pts, pts))
    band = confidence_band(surf, 1000, 0.1, 0.1)
    assert abs(band.halfwidth - 3.3 / rn(1000)) <= 1e-9
    assert abs(band.halfwidth - 0.20516) <= 5e-5

    elapsed = time.monotonic() - start
    assert elapsed < 1.0
    _report("01 hand-oracle suite", f"{elapsed:.2f}s")


def test_criterion_02_kernel_identities():
    start = time.monotonic()
    rng = np.random.default_rng(SEED)
    # 64-point Gauss-Legendre integrates these piecewise polynomials exactly.
    nodes, weights = np.polynomial.legendre.leggauss(64)
    for _ in range(200):
        w = rng.uniform(0.0, 1.0)
        h = rng.uniform(0.02, 0.98)
        lo, hi = max((w - 1) / h, -1.0), min(w / h, 1.0)
        ts = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        scale = 0.5 * (hi - lo)
        vals = local_linear_kernel(EP, w, h, ts)
        mass = scale * float(np.dot(weights, vals))
        tilt = scale * float(np.dot(weights, ts * vals))
        assert abs(mass - 1.0) <= 1e-10
        assert abs(tilt) <= 1e-10
    # Interior reduction is exact.
    ts = np.linspace(-1.5, 1.5, 101)
    for w, h in [(0.5, 0.25), (0.4, 0.3), (0.7, 0.2)]:
        assert h <= min(w, 1 - w)
        assert np.array_equal(local_linear_kernel(EP, w, h, ts), EP.pdf(ts))
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    _report("02 kernel identities", f"200 probes, {elapsed:.2f}s")


def test_criterion_03_indicator_limit_equivalence():
    start = time.monotonic()
    rng = np.random.default_rng(SEED)
    for n in (5, 12, 20, 30):
        sample = PairedSample(rng.normal(size=n), rng.normal(size=n))
        ps = pseudo_observations(sample)
        gaps = np.concatenate([np.diff(np.sort(ps.us)), np.diff(np.sort(ps.vs))])
        h = 0.45 * gaps[gaps > 0].min()
        checked = 0
        while checked < 100:
            u, v = rng.uniform(0.01, 0.99, 2)
            if np.min(np.abs(ps.us - u)) <= h or np.min(np.abs(ps.vs - v)) <= h:
                continue
            assert transformation_estimate(EP, ID, ps, h, u, v) == uniform_empirical_cdf(ps, u, v)
            checked += 1
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    _report("03 indicator-limit equivalence", f"{elapsed:.2f}s")


def test_criterion_04_mr_structural_checks():
    start = time.monotonic()
    rng = np.random.default_rng(SEED)
    # Groundedness holds exactly.
    sample = PairedSample(rng.normal(size=25), rng.normal(size=25))
    ps = pseudo_observations(sample)
    for t in np.linspace(0.0, 1.0, 11):
        assert mirror_reflection_estimate(EP, ps, 0.15, 0.0, t) == 0.0
        assert mirror_reflection_estimate(EP, ps, 0.15, t, 0.0) == 0.0
    # Interior-window equivalence with the plain estimator on 50 samples.
    done = 0
    while done < 50:
        n = int(rng.integers(4, 25))
        ps = pseudo_observations(PairedSample(rng.normal(size=n), rng.normal(size=n)))
        margin = min(ps.us.min(), ps.vs.min(), 1 - ps.us.max(), 1 - ps.vs.max())
        h = 0.9 * margin
        if h <= 1e-4:
            continue
        u = rng.uniform(h, 1 - h)
        v = rng.uniform(h, 1 - h)
        mr = mirror_reflection_estimate(EP, ps, h, u, v)
        plain = transformation_estimate(EP, ID, ps, h, u, v)
        assert abs(mr - plain) <= 1e-12
        done += 1
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    _report("04 MR structural checks", f"{elapsed:.2f}s")


def _lil_run(estimator, model, n, reps):
    grid = bandwidth_grid(n, c=1.0, bn="invlog", count=8)
    return simulate_deviations(
        estimator, model, grid, reps=reps, uv_count=33, seed=SEED, threads=THREADS
    )


def test_criterion_05_lil_bound():
    start = time.monotonic()
    lines = []
    for est in ("t", "ll", "mr"):
        for cname, model in COPULAS.items():
            res = _lil_run(est, model, 2000, 200)
            exceed = res.report.exceed_fraction
            assert exceed <= 0.05, f"{est}/{cname}: exceed fraction {exceed}"
            medians = {}
            for n in (500, 2000, 8000):
                medians[n] = _lil_run(est, model, n, 100).report.lil_quantiles["p50"]
            # Decreasing or flat: strict end-to-end decrease, 2% per-step
            # slack for Monte Carlo noise at M=100.
            assert medians[8000] <= medians[500], f"{est}/{cname}: {medians}"
            assert medians[2000] <= medians[500] * 1.02, f"{est}/{cname}: {medians}"
            assert medians[8000] <= medians[2000] * 1.02, f"{est}/{cname}: {medians}"
            lines.append(f"{est}/{cname} exceed={exceed:.3f} medians={medians}")
    elapsed = time.monotonic() - start
    _report("05 LIL bound", f"9 combos, trend over 3 n values, {elapsed:.0f}s")
    for line in lines:
        print("   ", line)


@pytest.fixture(scope="module")
def closeness_runs():
    return {n: _lil_run("t", IndependenceCopula(), n, 50) for n in (2000, 8000)}


def test_criterion_06_closeness_boundedness(closeness_runs):
    medians = {}
    for n, res in closeness_runs.items():
        max_over_h = res.report.closeness.max(axis=0)
        medians[n] = float(np.median(max_over_h))
    ratio = medians[8000] / medians[2000]
    assert 0.5 <= ratio <= 2.0, medians
    for n, value in medians.items():
        assert_allclose(value, CLOSENESS_PINNED[n], rtol=1e-6)
    _report("06 normalized-closeness boundedness",
            f"medians {medians}, ratio {ratio:.3f}")


def test_criterion_07_rate_stability(closeness_runs):
    means = {n: float(np.mean(res.rate_stats)) for n, res in closeness_runs.items()}
    ratio = means[8000] / means[2000]
    assert 1 / 3 <= ratio <= 3.0, means
    _report("07 rate stability", f"means {means}, ratio {ratio:.3f}")


def test_criterion_08_appendix_verifiers():
    gi = verify_envelope(EP, ID, probes=100_000, seed=SEED)
    assert gi["max_abs_g"] <= 1.0 <= gi["kappa"]
    assert gi["pass"] and gi["probes"] >= 100_000
    gi_smooth = verify_envelope(EP, get_transformation("smoothstep"), probes=100_000, seed=SEED)
    assert gi_smooth["pass"]

    hs = [0.02, 0.05, 0.1]
    estimates = []
    for h in hs:
        out = verify_variance_bound(EP, ID, IndependenceCopula(), h, mc=100_000, seed=SEED)
        assert out["c0"] == 6.0
        assert out["pass"], out
        estimates.append(out["estimate"])
    hs_arr = np.array(hs)
    slope = float(np.sum(np.array(estimates) * hs_arr) / np.sum(hs_arr**2))
    assert 0.0 < slope <= 6.0
    _report("08 appendix verifiers", f"max|g|={gi['max_abs_g']:.3f}, slope={slope:.3f}")


def test_criterion_09_process_closeness():
    lattice = interior_lattice(33)
    stats = {}
    for n in (500, 8000):
        dists = []
        for m in range(50):
            rng = replicate_rng(SEED, m)
            u, v = IndependenceCopula().sample(n, rng)
            sample = PairedSample(u, v)
            cn = empirical_copula_grid(sample, lattice, lattice)
            ct = uniform_empirical_cdf_grid((u, v), lattice, lattice)
            dists.append(math.sqrt(n) * np.max(np.abs(cn - ct)))
        stats[n] = float(np.mean(dists) / math.sqrt(math.log(math.log(n))))
    assert stats[8000] < stats[500], stats
    _report("09 process closeness", f"{stats}")


def test_criterion_10_band_coverage():
    n, h, eps, reps = 8000, 0.05, 0.1, 200
    region = np.linspace(h, 1 - h, 33)
    truth = region[:, None] * region[None, :]
    covered = 0
    for m in range(reps):
        rng = replicate_rng(SEED, m)
        u, v = IndependenceCopula().sample(n, rng)
        ps = pseudo_observations(PairedSample(u, v))
        values = transformation_surface(EP, ID, ps.us, ps.vs, h, region, region)
        band = confidence_band(SurfaceGrid(region, region, values), n, h, eps)
        if np.all((band.lower <= truth) & (truth <= band.upper)):
            covered += 1
    coverage = covered / reps
    assert coverage >= 0.95, coverage
    _report("10 band coverage", f"coverage={coverage:.3f}")


def test_criterion_11_cli_reproducibility(tmp_path, monkeypatch):
    rng = np.random.default_rng(3)
    xs = rng.normal(size=60)
    ys = 0.3 * xs + rng.normal(size=60)
    data = tmp_path / "data.csv"
    data.write_text("x,y\n" + "".join(f"{a},{b}\n" for a, b in zip(xs, ys)))

    commands = {
        "estimate": ["estimate", "--input", str(data), "--h", "0.1",
                     "--grid-uv", "7", "--out", str(tmp_path / "est.csv")],
        "simulate": ["simulate", "--n", "120", "--reps", "6", "--grid-h", "3",
                     "--grid-uv", "9", "--estimator", "mr",
                     "--out", str(tmp_path / "rep.csv")],
        "bands": ["bands", "--input", str(data), "--h", "0.15", "--grid-uv", "5",
                  "--out", str(tmp_path / "band.csv")],
        "verify": ["verify", "--h", "0.05", "--out", str(tmp_path / "ver.json")],
    }
    outputs = {
        "estimate": [tmp_path / "est.csv"],
        "simulate": [tmp_path / "rep.csv", tmp_path / "rep.summary.json"],
        "bands": [tmp_path / "band.csv"],
        "verify": [tmp_path / "ver.json"],
    }
    for name, argv in commands.items():
        snapshots = []
        for cap in ("1", "4"):
            monkeypatch.setenv("COPULA_LAB_THREADS", cap)
            assert cli_main(argv) == 0
            snapshots.append([p.read_bytes() for p in outputs[name]])
        assert snapshots[0] == snapshots[1], f"{name} differs across thread caps"
    _report("11 CLI reproducibility", "4 commands, thread caps 1 and 4")
