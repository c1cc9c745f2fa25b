"""Empirical distribution machinery.

ECDFs and their generalized inverses, rank and kernel-smoothed
pseudo-observations, the rank-based empirical copula, the uniform bivariate
empirical distribution and the empirical copula process.
"""

import numpy as np
from scipy.stats import rankdata

from .kernels import smoothed_marginal
from .validation import as_float_array, as_paired_array

__all__ = [
    "PairedSample",
    "PseudoObservations",
    "ecdf_eval",
    "generalized_inverse",
    "pseudo_observations",
    "empirical_copula",
    "empirical_copula_grid",
    "uniform_empirical_cdf",
    "uniform_empirical_cdf_grid",
    "empirical_copula_process",
]

RESCALED_RANK = "rescaled_rank"
SMOOTHED = "smoothed"


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


class PairedSample:
    """A bivariate i.i.d. sample (X_i, Y_i) with cached order statistics.

    Attributes
    ----------
    xs, ys : ndarray
        The observations (read-only views).
    n : int
        Common sample size, at least 2.
    has_ties : bool
        True when either coordinate contains duplicated values.
    sorted_x, sorted_y : ndarray
        Order statistics, computed once and cached for the grid sweeps.
    """

    def __init__(self, xs, ys):
        xs = as_float_array(xs, "xs")
        ys = as_float_array(ys, "ys")
        if xs.size != ys.size:
            raise ValueError("xs and ys must have the same length")
        if xs.size < 2:
            raise ValueError("need at least 2 observations")
        self.xs = _frozen(xs)
        self.ys = _frozen(ys)
        self.n = int(xs.size)
        self.sorted_x = _frozen(np.sort(xs))
        self.sorted_y = _frozen(np.sort(ys))
        self.has_ties = bool(
            np.any(np.diff(self.sorted_x) == 0.0)
            or np.any(np.diff(self.sorted_y) == 0.0)
        )

    @classmethod
    def from_array(cls, X):
        """Build from an (n, 2) array."""
        arr = as_paired_array(X)
        return cls(arr[:, 0], arr[:, 1])

    def __repr__(self):
        return f"PairedSample(n={self.n}, has_ties={self.has_ties})"


class PseudoObservations:
    """Pseudo-observations (U_i, V_i) in the unit square.

    ``variant`` is ``"rescaled_rank"`` (U_i = rank_i / (n+1), average ranks
    under ties) or ``"smoothed"`` (U_i from kernel-smoothed marginal CDFs
    with bandwidths ``b1``, ``b2``).
    """

    def __init__(self, us, vs, variant, b1=None, b2=None, has_ties=False):
        us = as_float_array(us, "us")
        vs = as_float_array(vs, "vs")
        if us.size != vs.size:
            raise ValueError("us and vs must have the same length")
        if np.any(us < 0.0) or np.any(us > 1.0) or np.any(vs < 0.0) or np.any(vs > 1.0):
            raise ValueError("pseudo-observations must lie in [0, 1]")
        if variant not in (RESCALED_RANK, SMOOTHED):
            raise ValueError(f"unknown pseudo-observation variant {variant!r}")
        self.us = _frozen(us)
        self.vs = _frozen(vs)
        self.n = int(us.size)
        self.variant = variant
        self.b1 = None if b1 is None else float(b1)
        self.b2 = None if b2 is None else float(b2)
        self.has_ties = bool(has_ties)

    def __repr__(self):
        return (
            f"PseudoObservations(n={self.n}, variant={self.variant!r}, "
            f"has_ties={self.has_ties})"
        )


def ecdf_eval(data, x):
    """Empirical CDF F_n(x) = (1/n) #{i : data_i <= x}.

    Right-continuous and nondecreasing in x; vectorized over x.
    """
    data = as_float_array(data, "data")
    xs = np.sort(data)
    x_arr = np.asarray(x, dtype=float)
    scalar = x_arr.ndim == 0
    counts = np.searchsorted(xs, np.atleast_1d(x_arr), side="right")
    out = counts / xs.size
    return float(out[0]) if scalar else out.reshape(x_arr.shape)


def _order_indices(u, n):
    """Smallest k in 1..n with k/n >= u, robust to float rounding of u*n."""
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if np.any(u_arr <= 0.0) or np.any(u_arr > 1.0):
        raise ValueError("quantile level out of range")
    k = np.clip(np.ceil(u_arr * n).astype(int), 1, n)
    # u*n carries at most one ulp of error, so one step each way suffices.
    k = np.where((k > 1) & ((k - 1) / n >= u_arr), k - 1, k)
    k = np.where(k / n < u_arr, k + 1, k)
    return k


def generalized_inverse(data, u):
    """Generalized inverse of the ECDF, F_n^{-1}(u) = inf{x : F_n(x) >= u}.

    Returns the ceil(u*n)-th order statistic; u must lie in (0, 1].
    """
    data = as_float_array(data, "data")
    xs = np.sort(data)
    u_arr = np.asarray(u, dtype=float)
    scalar = u_arr.ndim == 0
    k = _order_indices(np.atleast_1d(u_arr), xs.size)
    out = xs[k - 1]
    return float(out[0]) if scalar else out.reshape(u_arr.shape)


def pseudo_observations(sample, variant=RESCALED_RANK, kernel=None, b1=None, b2=None):
    """Build pseudo-observations from a paired sample.

    Rescaled ranks give U_i = rank(X_i) / (n+1) with average ranks under
    ties; the smoothed variant gives U_i = F_hat(X_i) from the kernel-smoothed
    marginal CDF and requires ``kernel`` plus bandwidths ``b1``, ``b2``.
    """
    if variant == RESCALED_RANK:
        n = sample.n
        us = rankdata(sample.xs, method="average") / (n + 1)
        vs = rankdata(sample.ys, method="average") / (n + 1)
        return PseudoObservations(us, vs, RESCALED_RANK, has_ties=sample.has_ties)
    if variant == SMOOTHED:
        if kernel is None or b1 is None or b2 is None:
            raise ValueError("smoothed pseudo-observations need kernel, b1 and b2")
        for b in (b1, b2):
            if not 0.0 < float(b) < 1.0:
                raise ValueError("bandwidth out of range")
        us = smoothed_marginal(kernel, sample.xs, b1, sample.xs)
        vs = smoothed_marginal(kernel, sample.ys, b2, sample.ys)
        return PseudoObservations(
            us, vs, SMOOTHED, b1=b1, b2=b2, has_ties=sample.has_ties
        )
    raise ValueError(f"unknown pseudo-observation variant {variant!r}")


def _check_unit_square(u, v):
    u, v = float(u), float(v)
    if not (0.0 <= u <= 1.0 and 0.0 <= v <= 1.0):
        raise ValueError("(u, v) must lie in the unit square")
    return u, v


def empirical_copula(sample, u, v):
    """Rank-based empirical copula C_n(u, v) = H_n(F_n^{-1}(u), G_n^{-1}(v)).

    Zero on the axes by the groundedness convention; u, v in [0, 1].
    """
    u, v = _check_unit_square(u, v)
    if u == 0.0 or v == 0.0:
        return 0.0
    kx = int(_order_indices(u, sample.n)[0])
    ky = int(_order_indices(v, sample.n)[0])
    thr_x = sample.sorted_x[kx - 1]
    thr_y = sample.sorted_y[ky - 1]
    return float(np.count_nonzero((sample.xs <= thr_x) & (sample.ys <= thr_y)) / sample.n)


def _cumulative_counts(ix, iy, gu, gv):
    """2-d cumulative histogram: out[a, b] = #{i : ix_i <= a, iy_i <= b}."""
    flat = np.bincount(ix * (gv + 1) + iy, minlength=(gu + 1) * (gv + 1))
    hist = flat.reshape(gu + 1, gv + 1).astype(float)
    return hist.cumsum(axis=0).cumsum(axis=1)[:gu, :gv]


def empirical_copula_grid(sample, u_points, v_points):
    """Empirical copula on a product grid, shape (len(u), len(v)).

    Grid points must be sorted and lie in (0, 1].
    """
    u_points = np.asarray(u_points, dtype=float)
    v_points = np.asarray(v_points, dtype=float)
    kx = _order_indices(u_points, sample.n)
    ky = _order_indices(v_points, sample.n)
    thr_x = sample.sorted_x[kx - 1]
    thr_y = sample.sorted_y[ky - 1]
    ix = np.searchsorted(thr_x, sample.xs, side="left")
    iy = np.searchsorted(thr_y, sample.ys, side="left")
    counts = _cumulative_counts(ix, iy, u_points.size, v_points.size)
    return counts / sample.n


def _as_uv(pairs):
    if isinstance(pairs, PseudoObservations):
        return pairs.us, pairs.vs
    if isinstance(pairs, tuple) and len(pairs) == 2:
        return as_float_array(pairs[0], "us"), as_float_array(pairs[1], "vs")
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr[:, 0], arr[:, 1]
    raise ValueError("expected PseudoObservations, (us, vs) or an (n, 2) array")


def uniform_empirical_cdf(pairs, u, v):
    """Uniform bivariate empirical CDF (1/n) sum_i 1{U_i <= u, V_i <= v}."""
    us, vs = _as_uv(pairs)
    u, v = _check_unit_square(u, v)
    return float(np.count_nonzero((us <= u) & (vs <= v)) / us.size)


def uniform_empirical_cdf_grid(pairs, u_points, v_points):
    """Uniform bivariate empirical CDF on a product grid of sorted points."""
    us, vs = _as_uv(pairs)
    u_points = np.asarray(u_points, dtype=float)
    v_points = np.asarray(v_points, dtype=float)
    ix = np.searchsorted(u_points, us, side="left")
    iy = np.searchsorted(v_points, vs, side="left")
    counts = _cumulative_counts(ix, iy, u_points.size, v_points.size)
    return counts / us.size


def empirical_copula_process(sample, model, u, v):
    """Empirical copula process sqrt(n) [C_n(u, v) - C(u, v)]."""
    cn = empirical_copula(sample, u, v)
    return float(np.sqrt(sample.n) * (cn - model.cdf(u, v)))
