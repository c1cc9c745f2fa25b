"""Parametric ground-truth copulas with exact CDFs, partial derivatives and
samplers for Monte Carlo work.

Samplers use conditional inversion (closed form except for the Gaussian
family, which draws a correlated normal pair), so a seeded generator
reproduces samples exactly.
"""

import numpy as np
from scipy import integrate
from scipy.stats import norm

__all__ = [
    "CopulaModel",
    "IndependenceCopula",
    "ClaytonCopula",
    "FGMCopula",
    "GaussianCopula",
    "make_copula",
    "bivariate_normal_cdf",
    "COPULA_NAMES",
]


class CopulaModel:
    """Base class: exact CDF C(u, v), partials C_u, C_v and a sampler.

    For every shipped family the partial derivatives are conditional CDFs,
    so ``sup_partial_u`` and ``sup_partial_v`` (the envelope constants used by
    the variance-bound verifier) are 1.
    """

    name = "base"
    sup_partial_u = 1.0
    sup_partial_v = 1.0

    def cdf(self, u, v):
        raise NotImplementedError

    def partial_u(self, u, v):
        """dC/du on (0, 1)^2."""
        raise NotImplementedError

    def partial_v(self, u, v):
        """dC/dv on (0, 1)^2."""
        raise NotImplementedError

    def partial(self, wrt, u, v):
        """Dispatch on ``wrt`` in {"u", "v"}."""
        if wrt == "u":
            return self.partial_u(u, v)
        if wrt == "v":
            return self.partial_v(u, v)
        raise ValueError(f"wrt must be 'u' or 'v', got {wrt!r}")

    def sample(self, n, rng):
        """Draw n pairs with uniform marginals coupled by this copula."""
        raise NotImplementedError

    def params(self):
        return {}

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({inner})"


class IndependenceCopula(CopulaModel):
    """Product copula C(u, v) = u v."""

    name = "independence"

    def cdf(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        return u * v

    def partial_u(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return v.copy()

    def partial_v(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        return u.copy()

    def sample(self, n, rng):
        return rng.random(n), rng.random(n)


class ClaytonCopula(CopulaModel):
    """Clayton copula C(u, v) = (u^-theta + v^-theta - 1)^(-1/theta), theta > 0.

    Lower-tail dependent; Kendall's tau is theta / (theta + 2).
    """

    name = "clayton"

    def __init__(self, theta):
        theta = float(theta)
        if theta <= 0.0:
            raise ValueError("Clayton theta must be positive")
        self.theta = theta

    def params(self):
        return {"theta": self.theta}

    def cdf(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        th = self.theta
        with np.errstate(divide="ignore", over="ignore"):
            s = np.power(u, -th) + np.power(v, -th) - 1.0
            out = np.power(s, -1.0 / th)
        # Groundedness on the axes, where u^-theta diverges.
        out = np.where((u <= 0.0) | (v <= 0.0), 0.0, out)
        return out if out.ndim else float(out)

    def partial_u(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        th = self.theta
        s = np.power(u, -th) + np.power(v, -th) - 1.0
        return np.power(u, -th - 1.0) * np.power(s, -1.0 / th - 1.0)

    def partial_v(self, u, v):
        return self.partial_u(v, u)

    def sample(self, n, rng):
        th = self.theta
        u = rng.random(n)
        w = rng.random(n)
        # Invert the conditional CDF C_u(u, .) at w.
        v = np.power(
            1.0 + np.power(u, -th) * (np.power(w, -th / (th + 1.0)) - 1.0), -1.0 / th
        )
        return u, v


class FGMCopula(CopulaModel):
    """Farlie-Gumbel-Morgenstern copula
    C(u, v) = u v (1 + theta (1-u)(1-v)), theta in [-1, 1].

    Weak dependence family; Spearman's rho is theta / 3.
    """

    name = "fgm"

    def __init__(self, theta):
        theta = float(theta)
        if not -1.0 <= theta <= 1.0:
            raise ValueError("FGM theta must lie in [-1, 1]")
        self.theta = theta

    def params(self):
        return {"theta": self.theta}

    def cdf(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        out = u * v * (1.0 + self.theta * (1.0 - u) * (1.0 - v))
        return out if out.ndim else float(out)

    def partial_u(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        out = v * (1.0 + self.theta * (1.0 - 2.0 * u) * (1.0 - v))
        return out if out.ndim else float(out)

    def partial_v(self, u, v):
        return self.partial_u(v, u)

    def sample(self, n, rng):
        u = rng.random(n)
        w = rng.random(n)
        a = self.theta * (1.0 - 2.0 * u)
        # Stable root of the conditional quadratic a v^2 - (1+a) v + w = 0.
        disc = np.sqrt((1.0 + a) ** 2 - 4.0 * a * w)
        v = 2.0 * w / (1.0 + a + disc)
        return u, v


def bivariate_normal_cdf(x, y, rho):
    """Standard bivariate normal CDF by deterministic quadrature.

    Uses Phi(x) Phi(y) plus a single smooth integral over the correlation
    angle; absolute error is far below 1e-10.
    """
    x_arr, y_arr = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    scalar = x_arr.ndim == 0
    x_flat = np.atleast_1d(x_arr).ravel()
    y_flat = np.atleast_1d(y_arr).ravel()
    base = norm.cdf(x_flat) * norm.cdf(y_flat)
    if rho == 0.0:
        out = base
    else:
        upper = np.arcsin(rho)
        corr = np.empty_like(base)
        for i, (h, k) in enumerate(zip(x_flat, y_flat)):
            if np.isinf(h) or np.isinf(k):
                corr[i] = 0.0
                continue

            def integrand(theta, h=h, k=k):
                s = np.sin(theta)
                c2 = np.cos(theta) ** 2
                return np.exp(-(h * h + k * k - 2.0 * h * k * s) / (2.0 * c2))

            val, _ = integrate.quad(
                integrand, 0.0, upper, epsabs=1e-14, epsrel=1e-12, limit=200
            )
            corr[i] = val / (2.0 * np.pi)
        out = base + corr
    out = np.clip(out, 0.0, 1.0)
    if scalar:
        return float(out[0])
    return out.reshape(x_arr.shape)


class GaussianCopula(CopulaModel):
    """Gaussian copula with correlation rho in (-1, 1)."""

    name = "gaussian"

    def __init__(self, rho):
        rho = float(rho)
        if not -1.0 < rho < 1.0:
            raise ValueError("Gaussian rho must lie in (-1, 1)")
        self.rho = rho

    def params(self):
        return {"rho": self.rho}

    def cdf(self, u, v):
        u, v = np.broadcast_arrays(np.asarray(u, float), np.asarray(v, float))
        with np.errstate(divide="ignore"):
            x = norm.ppf(u)
            y = norm.ppf(v)
        out = bivariate_normal_cdf(x, y, self.rho)
        out = np.asarray(out)
        out = np.where((u <= 0.0) | (v <= 0.0), 0.0, out)
        out = np.where(u >= 1.0, v, out)
        out = np.where(v >= 1.0, np.where(u >= 1.0, 1.0, u), out)
        return out if out.ndim else float(out)

    def partial_u(self, u, v):
        u, v = np.asarray(u, float), np.asarray(v, float)
        x = norm.ppf(u)
        y = norm.ppf(v)
        out = norm.cdf((y - self.rho * x) / np.sqrt(1.0 - self.rho**2))
        return out if out.ndim else float(out)

    def partial_v(self, u, v):
        return self.partial_u(v, u)

    def sample(self, n, rng):
        z1 = rng.standard_normal(n)
        z2 = rng.standard_normal(n)
        y = self.rho * z1 + np.sqrt(1.0 - self.rho**2) * z2
        return norm.cdf(z1), norm.cdf(y)


COPULA_NAMES = ("independence", "clayton", "fgm", "gaussian")


def make_copula(name, theta=None, rho=None):
    """Build a copula model from a family name and its parameter."""
    key = str(name).lower()
    if key == "independence":
        return IndependenceCopula()
    if key == "clayton":
        if theta is None:
            raise ValueError("clayton requires --theta")
        return ClaytonCopula(theta)
    if key == "fgm":
        if theta is None:
            raise ValueError("fgm requires --theta")
        return FGMCopula(theta)
    if key == "gaussian":
        if rho is None:
            raise ValueError("gaussian requires --rho")
        return GaussianCopula(rho)
    raise ValueError(f"unknown copula {name!r}; choose from {COPULA_NAMES}")
