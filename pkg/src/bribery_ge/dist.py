"""Fréchet productivity draws and the quadrature used by every equilibrium integral.

Expectations against the Fréchet law are taken in probability space: a
Gauss-Legendre rule on [-1, 1] is pushed onto u in (0, 1) through a smooth
sigmoidal map whose derivative vanishes at both ends, and s = quantile(u).
The map absorbs the power-law singularity of s(u) near u = 1, so a few
hundred nodes integrate the moments to near machine precision.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

__all__ = [
    "FrechetSpec",
    "QuadratureRule",
    "FrechetNodes",
    "unit_mean_scale",
    "cdf",
    "quantile",
    "gauss_legendre",
    "frechet_nodes",
    "expect_over_frechet",
    "partial_mean",
    "DEFAULT_NODES",
]

DEFAULT_NODES = 200

# order of the incomplete-beta map u = I_v(q, q); derivative ~ v^(q-1) at the ends
_SMOOTHING_ORDER = 6


@dataclass(frozen=True)
class FrechetSpec:
    """Fréchet law F(s) = exp(-(s/phi)^(-theta))."""

    theta: float
    phi: float

    def __post_init__(self):
        if not self.theta > 1.0:
            raise ValueError(f"theta must exceed 1 (mean undefined), got {self.theta}")
        if not self.phi > 0.0:
            raise ValueError(f"phi must be positive, got {self.phi}")

    @classmethod
    def unit_mean(cls, theta: float) -> "FrechetSpec":
        return cls(theta=theta, phi=unit_mean_scale(theta))

    @property
    def mean(self) -> float:
        return self.phi * special.gamma(1.0 - 1.0 / self.theta)


@dataclass(frozen=True)
class QuadratureRule:
    nodes: tuple
    weights: tuple

    def __post_init__(self):
        if len(self.nodes) != len(self.weights) or not self.nodes:
            raise ValueError("nodes and weights must be non-empty and of equal length")
        if any(b <= a for a, b in zip(self.nodes, self.nodes[1:])):
            raise ValueError("nodes must be strictly increasing")
        if any(w <= 0 for w in self.weights):
            raise ValueError("weights must be strictly positive")

    @property
    def count(self) -> int:
        return len(self.nodes)


def unit_mean_scale(theta: float) -> float:
    """Scale phi giving a unit-mean Fréchet law: phi = 1 / Gamma(1 - 1/theta)."""
    if not theta > 1.0:
        raise ValueError(f"mean undefined for theta={theta} (need theta > 1)")
    return 1.0 / special.gamma(1.0 - 1.0 / theta)


def cdf(spec: FrechetSpec, s):
    """F(s); vectorised. F(0) = 0 by continuity."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(np.isnan(s_arr)):
        raise ValueError("Fréchet cdf needs s >= 0")
    out = np.zeros_like(s_arr)
    pos = s_arr > 0
    out[pos] = np.exp(-((s_arr[pos] / spec.phi) ** (-spec.theta)))
    return out if out.ndim else float(out)


def cdf_extended(spec: FrechetSpec, s: np.ndarray) -> np.ndarray:
    # F on the whole real line (0 below the support); used for threshold lines
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-((s[pos] / spec.phi) ** (-spec.theta)))
    return out


def quantile(spec: FrechetSpec, u):
    """Inverse cdf: s = phi * (-ln u)^(-1/theta)."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(~((u_arr > 0) & (u_arr < 1))):
        raise ValueError("quantile needs 0 < u < 1")
    s = spec.phi * (-np.log(u_arr)) ** (-1.0 / spec.theta)
    return s if s.ndim else float(s)


def gauss_legendre(count: int) -> QuadratureRule:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    if count < 1:
        raise ValueError("count must be >= 1")
    x, w = np.polynomial.legendre.leggauss(count)
    return QuadratureRule(nodes=tuple(float(v) for v in x), weights=tuple(float(v) for v in w))


@dataclass(frozen=True)
class FrechetNodes:
    """Productivity nodes s_i with probability weights for E[g(s)] = sum w_i g(s_i)."""

    s: np.ndarray
    weights: np.ndarray
    spec: FrechetSpec


def _map_rule(rule: QuadratureRule):
    t = np.asarray(rule.nodes)
    w = np.asarray(rule.weights)
    q = _SMOOTHING_ORDER
    v, vc = (1.0 + t) / 2.0, (1.0 - t) / 2.0
    u = special.betainc(q, q, v)
    uc = special.betainc(q, q, vc)  # 1 - u without cancellation
    log_dens = (q - 1) * (np.log(v) + np.log(vc)) - special.betaln(q, q)
    return u, uc, 0.5 * w * np.exp(log_dens)


def frechet_nodes(spec: FrechetSpec, rule: QuadratureRule) -> FrechetNodes:
    u, uc, weights = _map_rule(rule)
    # -ln u, accurate on both tails
    x = np.empty_like(u)
    lo = u < 0.5
    x[lo] = -np.log(u[lo])
    x[~lo] = -np.log1p(-uc[~lo])
    s = spec.phi * x ** (-1.0 / spec.theta)
    return FrechetNodes(s=s, weights=weights, spec=spec)


@functools.lru_cache(maxsize=64)
def cached_nodes(theta: float, phi: float, count: int) -> FrechetNodes:
    return frechet_nodes(FrechetSpec(theta, phi), gauss_legendre(count))


def expect_over_frechet(spec: FrechetSpec, g: Callable, rule: QuadratureRule) -> float:
    """Quadrature approximation of E[g(s)], s ~ F.

    ``g`` is called once with the array of productivity nodes and must return
    an array of the same shape (scalar-only callables are evaluated per node).
    """
    fn = frechet_nodes(spec, rule)
    try:
        vals = np.asarray(g(fn.s), dtype=float)
        if vals.shape != fn.s.shape:
            vals = np.broadcast_to(vals, fn.s.shape)
    except (TypeError, ValueError):
        vals = np.array([float(g(float(x))) for x in fn.s])
    bad = ~np.isfinite(vals)
    if bad.any():
        node = float(fn.s[np.argmax(bad)])
        raise ValueError(f"integrand is not finite at productivity node s={node!r}")
    return float(fn.weights @ vals)


def partial_mean(spec: FrechetSpec, t):
    """Upper partial expectation E[s 1{s >= t}] = phi Gamma(1-1/theta) P(1-1/theta, (t/phi)^-theta).

    Defined for all real t; below the support the full mean is returned.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    a = 1.0 - 1.0 / spec.theta
    out = np.full_like(t_arr, spec.mean)
    pos = t_arr > 0
    x = (t_arr[pos] / spec.phi) ** (-spec.theta)
    out[pos] = spec.mean * special.gammainc(a, x)
    return out if np.ndim(t) else float(out[0])


def survival_extended(spec: FrechetSpec, t: np.ndarray) -> np.ndarray:
    """1 - F(t) on the real line, computed without cancellation for large t."""
    out = np.ones_like(t)
    pos = t > 0
    out[pos] = -np.expm1(-((t[pos] / spec.phi) ** (-spec.theta)))
    return out


def sample(spec: FrechetSpec, size, rng: np.random.Generator) -> np.ndarray:
    """Inverse-cdf draws."""
    u = rng.random(size)
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).eps)
    return spec.phi * (-np.log(u)) ** (-1.0 / spec.theta)
