"""Monte Carlo harness for the uniform-in-bandwidth deviation experiments.

Draws M independent samples from a ground-truth copula, sweeps the chosen
estimator over a bandwidth grid and an interior evaluation lattice, centers
the replicate surfaces at their cross-replication mean and reduces them to
the sup-deviation statistics.

Replicates are independent work units: replicate i owns a generator derived
from (master seed, i) and reduction happens in fixed replicate order, so
results are byte-identical no matter how many worker threads run
(``COPULA_LAB_THREADS`` caps the pool).
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .deviation import (
    BandwidthGrid,
    DeviationReport,
    bandwidth_rate_statistic,
    lil_report,
    closeness_statistic,
)
from .empirical import (
    RESCALED_RANK,
    SMOOTHED,
    PairedSample,
    pseudo_observations,
    uniform_empirical_cdf_grid,
)
from .estimators import (
    interior_lattice,
    local_linear_surface,
    mirror_reflection_surface,
    transformation_surface,
)
from .kernels import Kernel, local_linear_kernel, get_kernel, get_transformation

__all__ = [
    "SimulationResult",
    "simulate_deviations",
    "replicate_rng",
    "resolve_threads",
    "THREAD_ENV",
]

THREAD_ENV = "COPULA_LAB_THREADS"
_MASK64 = (1 << 64) - 1


def replicate_rng(seed, index):
    """Generator for one replicate, derived from (master seed, index)."""
    return np.random.default_rng([int(seed) & _MASK64, int(index)])


def resolve_threads(threads=None):
    """Worker count: explicit argument, else COPULA_LAB_THREADS, else small."""
    if threads is None:
        env = os.environ.get(THREAD_ENV)
        if env:
            threads = int(env)
        else:
            threads = min(4, os.cpu_count() or 1)
    return max(1, int(threads))


@dataclass
class SimulationResult:
    """Everything one deviation experiment produced.

    ``report`` carries the per-bandwidth sup deviations, the R_n-scaled LIL
    statistics and the normalized closeness statistics; ``rate_stats`` the
    per-replicate rate statistics.
    """

    report: DeviationReport
    copula: str
    seed: int
    uv_points: np.ndarray
    rate_stats: np.ndarray


def _surface_fn(estimator):
    if estimator == "t":
        return transformation_surface
    if estimator == "ll":
        return local_linear_surface
    if estimator == "mr":
        return mirror_reflection_surface
    raise ValueError(f"unknown estimator {estimator!r}; choose from ('t', 'll', 'mr')")


def _replicate(estimator, kernel, phi, model, n, hs, u_pts, seed, index, b1, b2):
    rng = replicate_rng(seed, index)
    us_raw, vs_raw = model.sample(n, rng)
    sample = PairedSample(us_raw, vs_raw)
    if estimator == "ll":
        pseudo = pseudo_observations(sample, SMOOTHED, kernel=kernel, b1=b1, b2=b2)
    else:
        pseudo = pseudo_observations(sample, RESCALED_RANK)
    g = u_pts.size
    surfaces = np.empty((hs.size, g, g))
    for j, h in enumerate(hs):
        if estimator == "t":
            surfaces[j] = transformation_surface(
                kernel, phi, pseudo.us, pseudo.vs, h, u_pts, u_pts
            )
        elif estimator == "ll":
            surfaces[j] = local_linear_surface(
                kernel, pseudo.us, pseudo.vs, h, u_pts, u_pts
            )
        else:
            surfaces[j] = mirror_reflection_surface(
                kernel, pseudo.us, pseudo.vs, h, u_pts, u_pts
            )
    ctilde = uniform_empirical_cdf_grid((us_raw, vs_raw), u_pts, u_pts)
    return surfaces, ctilde


def _inverse_derivative_sup(phi, region):
    probes = np.linspace(region[0], region[1], 257)
    deriv = np.asarray(phi.derivative(phi.inverse(probes)), dtype=float)
    deriv = deriv[deriv > 1e-9]
    if deriv.size == 0:
        return np.inf
    return float(1.0 / deriv.min())


def _discretization_bound(estimator, kernel, phi, h_min, u_pts):
    """Conservative sup-discretization bound for the lattice sweep.

    Surfaces are coordinatewise Lipschitz with constant L; the sup over the
    continuum exceeds the lattice sup by at most spacing * L.
    """
    spacing = float(u_pts[0])
    region = (float(u_pts[0]), float(u_pts[-1]))
    if estimator == "t":
        lip = kernel.sup_norm / h_min * _inverse_derivative_sup(phi, region)
    elif estimator == "mr":
        # Three reflections per axis, partner factor bounded by 3.
        lip = 9.0 * kernel.sup_norm / h_min
    else:
        ts = np.linspace(-1.0, 1.0, 201)
        sup_k = max(
            float(np.max(np.abs(local_linear_kernel(kernel, w, h_min, ts))))
            for w in u_pts
        )
        lip = sup_k / h_min
    return spacing * lip


def simulate_deviations(
    estimator,
    model,
    grid,
    reps,
    uv_count=33,
    kernel="epanechnikov",
    phi="identity",
    seed=42,
    threads=None,
    b1=None,
    b2=None,
):
    """Run one deviation experiment.

    Parameters
    ----------
    estimator : str
        "t", "ll" or "mr".
    model : CopulaModel
        Ground truth used both to sample and to center the uniform empirical
        process.
    grid : BandwidthGrid
    reps : int
        Number of replications M >= 2.
    uv_count : int
        Interior lattice size per axis (lattice i/(uv_count+1)).
    kernel, phi : str or objects
    seed : int
        Master seed; replicate i derives its generator from (seed, i).
    threads : int or None
        Worker threads; None consults COPULA_LAB_THREADS.
    b1, b2 : float or None
        Local-linear marginal bandwidths; default n^(-1/3).

    Returns
    -------
    SimulationResult
    """
    if not isinstance(grid, BandwidthGrid):
        raise TypeError("grid must be a BandwidthGrid")
    reps = int(reps)
    if reps < 2:
        raise ValueError("need at least 2 replications")
    estimator = str(estimator).lower()
    _surface_fn(estimator)
    kernel = kernel if isinstance(kernel, Kernel) else get_kernel(kernel)
    phi = phi if hasattr(phi, "inverse") else get_transformation(phi)
    n = grid.n
    if estimator == "ll":
        default_b = n ** (-1.0 / 3.0)
        b1 = default_b if b1 is None else float(b1)
        b2 = default_b if b2 is None else float(b2)
    u_pts = interior_lattice(uv_count)
    hs = grid.points

    surfaces = np.empty((hs.size, reps, u_pts.size, u_pts.size))
    ctilde = np.empty((reps, u_pts.size, u_pts.size))

    def run(index):
        return index, _replicate(
            estimator, kernel, phi, model, n, hs, u_pts, seed, index, b1, b2
        )

    workers = resolve_threads(threads)
    if workers == 1:
        results = map(run, range(reps))
        for index, (surf, ctl) in results:
            surfaces[:, index] = surf
            ctilde[index] = ctl
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for index, (surf, ctl) in pool.map(run, range(reps)):
                surfaces[:, index] = surf
                ctilde[index] = ctl

    deviations = surfaces - surfaces.mean(axis=1, keepdims=True)
    truth = np.asarray(model.cdf(u_pts[:, None], u_pts[None, :]), dtype=float)
    ctilde_proc = np.sqrt(n) * (ctilde - truth[None, ...])

    closeness = np.empty((hs.size, reps))
    for j, h in enumerate(hs):
        closeness[j] = closeness_statistic(deviations[j], ctilde_proc, h, n)
    rate_stats = (
        bandwidth_rate_statistic(deviations, ctilde_proc, grid, n)
        if grid.conforming
        else np.full(reps, np.nan)
    )

    report = lil_report(
        estimator,
        deviations,
        grid,
        n,
        closeness=closeness,
        sup_discretization_bound=_discretization_bound(
            estimator, kernel, phi, grid.h_min, u_pts
        ),
    )
    return SimulationResult(
        report=report,
        copula=model.name,
        seed=int(seed),
        uv_points=u_pts,
        rate_stats=rate_stats,
    )
