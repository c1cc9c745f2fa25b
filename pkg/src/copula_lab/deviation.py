"""Deviation statistics and numerical condition verifiers.

Centered deviation fields of the kernel copula estimators, their
sup statistics rescaled by R_n = sqrt(n / (2 log log n)), the normalized
closeness statistics to the uniform bivariate empirical process, LIL-based
simultaneous confidence bands, and Monte Carlo verifiers for the envelope
and variance bounds of the function class driving those statistics.

Natural logarithms throughout; n >= 16 keeps log log n safely positive.
"""

from dataclasses import dataclass, field

import numpy as np

from .estimators import SurfaceGrid
from .kernels import Kernel, Transformation

__all__ = [
    "rn",
    "BandwidthGrid",
    "bandwidth_grid",
    "deviation_field",
    "DeviationReport",
    "lil_statistics",
    "lil_report",
    "closeness_statistic",
    "bandwidth_rate_statistic",
    "ConfidenceBand",
    "confidence_band",
    "verify_envelope",
    "verify_variance_bound",
]

LIL_BOUND = 3.0


def rn(n):
    """LIL normalization R_n = sqrt(n / (2 log log n)) for n >= 16."""
    n = int(n)
    if n < 16:
        raise ValueError("R_n undefined below n=16")
    return float(np.sqrt(n / (2.0 * np.log(np.log(n)))))


@dataclass(frozen=True)
class BandwidthGrid:
    """Geometric bandwidth grid on [c log n / n, bn].

    ``conforming`` records whether bn >= 1/log n, the regime the
    uniform-in-bandwidth bounds require; smaller bn is allowed for
    exploration but flagged.
    """

    n: int
    c: float
    bn: float
    points: np.ndarray
    conforming: bool

    @property
    def h_min(self):
        return float(self.points[0])


def bandwidth_grid(n, c=1.0, bn="invlog", count=8):
    """Build a geometric grid of ``count`` bandwidths from c log(n)/n to bn.

    ``bn`` is either the string ``"invlog"`` (bn = 1/log n) or an explicit
    upper endpoint in (0, 1).  Endpoints are always included.
    """
    n = int(n)
    if n < 2:
        raise ValueError("need n >= 2 for a bandwidth grid")
    c = float(c)
    if c <= 0.0:
        raise ValueError("c must be positive")
    count = int(count)
    if count < 2:
        raise ValueError("need at least 2 grid points")
    invlog = 1.0 / np.log(n)
    if isinstance(bn, str):
        if bn.lower() != "invlog":
            raise ValueError(f"unknown bn rule {bn!r}")
        bn_value = invlog
    else:
        bn_value = float(bn)
    if not 0.0 < bn_value < 1.0:
        raise ValueError("bn must lie in (0, 1)")
    h_min = c * np.log(n) / n
    if h_min >= bn_value:
        raise ValueError("bandwidth range empty at this n")
    points = np.geomspace(h_min, bn_value, count)
    points[0] = h_min
    points[-1] = bn_value
    conforming = bool(bn_value >= invlog * (1.0 - 1e-12))
    return BandwidthGrid(
        n=n, c=c, bn=float(bn_value), points=points, conforming=conforming
    )


def deviation_field(replicate_surfaces, mean_surface=None):
    """Center replicate surfaces at their cross-replication mean.

    ``replicate_surfaces`` stacks M >= 2 surfaces on the leading axis; the
    mean plays the role of the (intractable) estimator expectation.
    """
    surfaces = np.asarray(replicate_surfaces, dtype=float)
    if surfaces.ndim < 3 or surfaces.shape[0] < 2:
        raise ValueError("need at least 2 replicate surfaces")
    if mean_surface is None:
        mean_surface = surfaces.mean(axis=0)
    else:
        mean_surface = np.asarray(mean_surface, dtype=float)
        if mean_surface.shape != surfaces.shape[1:]:
            raise ValueError("grid mismatch between replicates and mean surface")
    return surfaces - mean_surface[None, ...]


def _sup_abs(values):
    flat = np.abs(values).reshape(values.shape[:-2] + (-1,))
    return flat.max(axis=-1)


def lil_statistics(deviations, n):
    """Per-replicate LIL statistic R_n sup_h sup_uv |D_hat|.

    ``deviations`` has shape (H, M, Gu, Gv): centered surfaces per bandwidth
    and replicate.
    """
    deviations = np.asarray(deviations, dtype=float)
    if deviations.ndim != 4:
        raise ValueError("expected deviations of shape (H, M, Gu, Gv)")
    sup_per_h = _sup_abs(deviations)  # (H, M)
    return rn(n) * sup_per_h.max(axis=0)


@dataclass
class DeviationReport:
    """Sup-deviation statistics of one Monte Carlo experiment.

    ``sup_abs_dev`` and ``closeness`` are (H, M) arrays indexed by bandwidth and
    replicate; ``lil_stats`` is the per-replicate R_n-scaled sup statistic
    and ``exceed_fraction`` the fraction of replicates above the almost-sure
    bound 3.
    """

    estimator: str
    n: int
    reps: int
    rn: float
    grid: BandwidthGrid
    sup_abs_dev: np.ndarray
    lil_stats: np.ndarray
    exceed_fraction: float
    lil_quantiles: dict = field(default_factory=dict)
    closeness: np.ndarray | None = None
    sup_discretization_bound: float | None = None

    @property
    def hs(self):
        return self.grid.points


def lil_report(estimator, deviations, grid, n, closeness=None, sup_discretization_bound=None):
    """Assemble a DeviationReport from centered deviation surfaces."""
    deviations = np.asarray(deviations, dtype=float)
    if deviations.shape[0] != grid.points.size:
        raise ValueError("grid mismatch: one deviation block per bandwidth required")
    sup_per_h = _sup_abs(deviations)  # (H, M)
    stats = rn(n) * sup_per_h.max(axis=0)
    quantiles = {
        "p50": float(np.quantile(stats, 0.5)),
        "p90": float(np.quantile(stats, 0.9)),
        "p95": float(np.quantile(stats, 0.95)),
        "max": float(stats.max()),
    }
    return DeviationReport(
        estimator=estimator,
        n=int(n),
        reps=int(deviations.shape[1]),
        rn=rn(n),
        grid=grid,
        sup_abs_dev=sup_per_h,
        lil_stats=stats,
        exceed_fraction=float(np.mean(stats > LIL_BOUND)),
        lil_quantiles=quantiles,
        closeness=None if closeness is None else np.asarray(closeness, dtype=float),
        sup_discretization_bound=sup_discretization_bound,
    )


def closeness_statistic(deviation_surfaces, ctilde_surfaces, h, n):
    """Normalized closeness statistic
    sup_uv |sqrt(n) D_hat - Ctilde_n| / sqrt(h (|log h| v log log n)).

    Vectorized over any leading replicate axes shared by both inputs.
    """
    dev = np.asarray(deviation_surfaces, dtype=float)
    ctl = np.asarray(ctilde_surfaces, dtype=float)
    n = int(n)
    if n < 16:
        raise ValueError("R_n undefined below n=16")
    h = float(h)
    if not 0.0 < h < 1.0:
        raise ValueError("bandwidth out of range")
    normalizer = np.sqrt(h * max(abs(np.log(h)), np.log(np.log(n))))
    sup = _sup_abs(np.sqrt(n) * dev - ctl)
    out = sup / normalizer
    return float(out) if np.ndim(out) == 0 else out


def bandwidth_rate_statistic(deviations, ctilde_surfaces, grid, n):
    """Per-replicate rate statistic
    [sup_h sup_uv |sqrt(n) D_hat - Ctilde_n| / sqrt(log log n)] / sqrt(bn).
    """
    if not grid.conforming:
        raise ValueError("rate statistic requires bn >= 1/log n")
    dev = np.asarray(deviations, dtype=float)
    ctl = np.asarray(ctilde_surfaces, dtype=float)
    if dev.ndim != 4 or dev.shape[0] != grid.points.size:
        raise ValueError("expected deviations of shape (H, M, Gu, Gv)")
    n = int(n)
    if n < 16:
        raise ValueError("R_n undefined below n=16")
    sup = _sup_abs(np.sqrt(n) * dev - ctl[None, ...]).max(axis=0)  # (M,)
    return sup / np.sqrt(np.log(np.log(n))) / np.sqrt(grid.bn)


@dataclass(frozen=True)
class ConfidenceBand:
    """Simultaneous confidence band center +- 3(1+eps)/R_n, clipped to [0, 1],
    on a grid restricted to [h, 1-h]^2."""

    u_points: np.ndarray
    v_points: np.ndarray
    center: np.ndarray
    halfwidth: float
    epsilon: float
    lower: np.ndarray
    upper: np.ndarray


def confidence_band(estimate, n, h, epsilon):
    """Build the LIL-based simultaneous confidence band around an estimated
    surface.

    The grid must stay inside [h, 1-h]^2, where the boundary bias of the
    kernel estimators is absent.
    """
    if not isinstance(estimate, SurfaceGrid):
        raise TypeError("estimate must be a SurfaceGrid")
    epsilon = float(epsilon)
    if not 0.0 <= epsilon < 1.0:
        raise ValueError("epsilon must lie in [0, 1)")
    h = float(h)
    if not 0.0 < h < 0.5:
        raise ValueError("bandwidth out of range for a band region")
    for pts in (estimate.u_points, estimate.v_points):
        if np.any(pts < h) or np.any(pts > 1.0 - h):
            raise ValueError("band region violates boundary restriction")
    halfwidth = LIL_BOUND * (1.0 + epsilon) / rn(n)
    lower = np.maximum(estimate.values - halfwidth, 0.0)
    upper = np.minimum(estimate.values + halfwidth, 1.0)
    return ConfidenceBand(
        u_points=estimate.u_points,
        v_points=estimate.v_points,
        center=estimate.values,
        halfwidth=float(halfwidth),
        epsilon=epsilon,
        lower=lower,
        upper=upper,
    )


def _random_monotone_map(rng):
    """Random piecewise-linear increasing bijection of [0, 1]."""
    knots = int(rng.integers(1, 6))
    xs = np.concatenate(([0.0], np.sort(rng.random(knots)), [1.0]))
    ys = np.concatenate(([0.0], np.sort(rng.random(knots)), [1.0]))
    return lambda s: np.interp(s, xs, ys)


def verify_envelope(kernel, phi, probes=100_000, seed=0):
    """Probe the envelope bound for the deviation function class.

    Evaluates g(s, t, h) = K((phi^-1(u) - phi^-1(z1(s)))/h)
    K((phi^-1(v) - phi^-1(z2(t)))/h) - 1{s <= u, t <= v} over random
    (s, t, u, v, h) probes and random nondecreasing maps z1, z2 (plus the
    identity), and checks max |g| against kappa = 4 ||k||^2 + 1.

    The pass is structural, not statistical: distribution-type kernels keep
    |g| <= 1 <= kappa for every probe.
    """
    if not isinstance(kernel, Kernel):
        raise TypeError("kernel must be a Kernel")
    if not isinstance(phi, Transformation):
        raise TypeError("phi must be a Transformation")
    probes = int(probes)
    if probes < 1:
        raise ValueError("need at least one probe")
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 71])
    kappa = 4.0 * kernel.sup_norm**2 + 1.0

    batches = 32
    per_batch = max(1, probes // batches)
    max_abs = 0.0
    total = 0
    for batch in range(batches):
        m = per_batch if batch < batches - 1 else max(1, probes - total)
        s, t, u, v = rng.random((4, m))
        # Mix uniform and log-uniform bandwidths to stress small h.
        h = np.where(
            rng.random(m) < 0.5, rng.uniform(1e-6, 1.0, m), 10.0 ** rng.uniform(-4, 0, m)
        )
        np.clip(h, 1e-12, 1.0 - 1e-12, out=h)
        if batch == 0:
            z1 = z2 = lambda x: x
        else:
            z1 = _random_monotone_map(rng)
            z2 = _random_monotone_map(rng)
        ku = kernel.cdf((phi.inverse(u) - phi.inverse(z1(s))) / h)
        kv = kernel.cdf((phi.inverse(v) - phi.inverse(z2(t))) / h)
        g = ku * kv - ((s <= u) & (t <= v))
        max_abs = max(max_abs, float(np.abs(g).max()))
        total += m
        if total >= probes:
            break
    return {"kappa": kappa, "max_abs_g": max_abs, "probes": total, "pass": max_abs <= kappa}


def verify_variance_bound(kernel, phi, model, h, mc=100_000, seed=0, probe_points=None):
    """Monte Carlo check of the variance bound E g^2(U, V, h) <= C0 h.

    C0 = 4 (||C_u|| + ||C_v||) ||phi'|| ||k||.  With identity marginal maps,
    g^2 is averaged over ``mc`` exact copula draws at each probe point and
    compared against C0 h plus three standard errors.
    """
    mc = int(mc)
    if mc < 10_000:
        raise ValueError("need at least 1e4 Monte Carlo draws")
    h = float(h)
    if not 0.0 < h <= 0.25:
        raise ValueError("h must lie in (0, 0.25]")
    rng = np.random.default_rng([int(seed) & (2**64 - 1), 72])
    if probe_points is None:
        axis = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
        probe_points = [(u, v) for u in axis for v in axis]
    c0 = (
        4.0
        * (model.sup_partial_u + model.sup_partial_v)
        * phi.derivative_bound
        * kernel.sup_norm
    )
    us, vs = model.sample(mc, rng)
    tu = phi.inverse(us)
    tv = phi.inverse(vs)
    max_eg2 = 0.0
    passed = True
    for u, v in probe_points:
        ku = kernel.cdf((phi.inverse(float(u)) - tu) / h)
        kv = kernel.cdf((phi.inverse(float(v)) - tv) / h)
        g2 = (ku * kv - ((us <= u) & (vs <= v))) ** 2
        point_estimate = float(g2.mean())
        stderr = float(g2.std(ddof=1) / np.sqrt(mc))
        if point_estimate > c0 * h + 3.0 * stderr:
            passed = False
        max_eg2 = max(max_eg2, point_estimate)
    return {
        "c0": c0,
        "h": h,
        "c0_times_h": c0 * h,
        "estimate": max_eg2,
        "draws": mc,
        "pass": passed,
    }
