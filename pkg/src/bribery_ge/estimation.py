"""Production-side estimation: labour elasticity by control-function regression,
span of control from profit shares, and the implied capital share."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class TechnologyParams:
    """Production and cost primitives of one technology.

    Output is (A s)^sigma (k^alpha n^(1-alpha))^(1-sigma); ``c`` is the
    per-period operating cost in output units.
    """

    A: float
    sigma: float
    alpha: float
    c: float = 0.0

    def __post_init__(self):
        if not self.A >= 0:
            raise ValueError(f"A must be >= 0, got {self.A!r}")
        if not 0 < self.sigma < 1:
            raise ValueError(f"sigma must lie in (0, 1), got {self.sigma!r}")
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.c >= 0:
            raise ValueError(f"operating cost must be >= 0, got {self.c!r}")

    @property
    def gamma(self) -> float:
        """Labour elasticity of output, (1 - alpha)(1 - sigma)."""
        return (1.0 - self.alpha) * (1.0 - self.sigma)

    @property
    def capital_intensity(self) -> float:
        return self.alpha * (1.0 - self.sigma)


@dataclass(frozen=True)
class ElasticityEstimate:
    gamma: float
    residual_variance: float
    n_obs: int
    std_error: float = float("nan")
    coefficients: tuple = ()
    columns: tuple = ()


def design_columns(order: int) -> list:
    cols = ["1", "k", "m", "k*m"]
    cols += [f"{v}^{q}" for q in range(2, order + 1) for v in ("k", "m")]
    return cols


def polynomial_design(k_values, m_values, order: int = 5) -> np.ndarray:
    """Columns: intercept, k, m, k*m, then k^q, m^q for q = 2..order."""
    k = np.asarray(k_values, dtype=float)
    m = np.asarray(m_values, dtype=float)
    if k.shape != m.shape or k.ndim != 1:
        raise ValueError(f"k and m must be 1-D of equal length, got {k.shape} and {m.shape}")
    if order < 1:
        raise ValueError("order must be >= 1")
    cols = [np.ones_like(k), k, m, k * m]
    for q in range(2, order + 1):
        cols += [k**q, m**q]
    return np.column_stack(cols)


def _rank_check(X: np.ndarray, names: list, rtol: float = 1e-10):
    """Raise naming the columns that pivoted QR finds linearly dependent."""
    scale = np.abs(X).max(axis=0)
    scale[scale == 0] = 1.0
    _, R, piv = scipy.linalg.qr(X / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int((diag > rtol * diag[0]).sum()) if diag.size else 0
    if rank < X.shape[1]:
        dependent = [names[i] for i in piv[rank:]]
        raise EstimationError(f"rank-deficient design ({rank} of {X.shape[1]}); collinear columns: {', '.join(dependent)}")
    return scale


def estimate_labor_elasticity(y, n, k, m, order: int = 5, scale: str = "log",
                              groups=None) -> ElasticityEstimate:
    """Least squares of y on [n, f(k, m)]; the coefficient on n is the labour elasticity.

    ``scale="log"`` (default) regresses logs of the monetary values; ``"levels"`` uses
    them as reported.
    ``groups`` (one label per observation) adds a dummy per group beyond the first.
    """
    y, n, k, m = (np.asarray(v, dtype=float) for v in (y, n, k, m))
    if not (y.shape == n.shape == k.shape == m.shape):
        raise ValueError("y, n, k, m must have equal length")
    if scale == "log":
        if min(v.min() for v in (y, n, k, m)) <= 0:
            raise EstimationError("log regression needs strictly positive y, n, k, m")
        y, n, k, m = (np.log(v) for v in (y, n, k, m))
    elif scale != "levels":
        raise ValueError(f"unknown scale {scale!r}")

    X = np.column_stack([n, polynomial_design(k, m, order)])
    names = ["n"] + design_columns(order)
    if groups is not None:
        labels = list(groups)
        if len(labels) != X.shape[0]:
            raise ValueError("groups must have one label per observation")
        levels = sorted(set(labels))
        if len(levels) > 1:
            lab = np.array(labels, dtype=object)
            X = np.column_stack([X] + [(lab == g).astype(float) for g in levels[1:]])
            names += [f"group={g}" for g in levels[1:]]
    if X.shape[0] <= X.shape[1]:
        raise EstimationError(f"need more observations ({X.shape[0]}) than regressors ({X.shape[1]})")
    col_scale = _rank_check(X, names)
    Xs = X / col_scale
    Q, R = np.linalg.qr(Xs)
    beta_s = scipy.linalg.solve_triangular(R, Q.T @ y)
    beta = beta_s / col_scale
    resid = y - X @ beta
    dof = X.shape[0] - X.shape[1]
    s2 = float(resid @ resid / dof)
    Rinv = scipy.linalg.solve_triangular(R, np.eye(R.shape[0]))
    se0 = np.sqrt(s2 * (Rinv[0] @ Rinv[0])) / col_scale[0]
    gamma = float(beta[0])
    return ElasticityEstimate(gamma=gamma, residual_variance=s2, n_obs=X.shape[0],
                              std_error=float(se0), coefficients=tuple(beta.tolist()),
                              columns=tuple(names))


def mean_profit_share(records, rental_rate: float) -> float:
    """Average after-bribe profit share of revenue across firms.

    Capital payments are the rental rate times the reported capital stock;
    each firm's share is floored at zero.
    """
    shares = []
    for rec in records:
        b = rec.bribe_share or 0.0
        revenue = (1.0 - b) * rec.sales
        if revenue <= 0:
            continue
        profit = revenue - rec.labor_cost - rental_rate * rec.capital - rec.intermediate_cost
        shares.append(max(profit, 0.0) / revenue)
    if not shares:
        raise EstimationError("no firm with positive after-bribe revenue")
    return float(np.mean(shares))


def recover_sigma_alpha(gamma: float, mean_profit_share: float) -> tuple:
    """(sigma, alpha) from the labour elasticity and the profit share.

    sigma equals the profit share and alpha = 1 - gamma / (1 - sigma).
    """
    if not 0 < gamma < 1:
        raise EstimationError(f"gamma must lie in (0, 1), got {gamma!r}")
    if not 0 < mean_profit_share < 1:
        raise EstimationError(f"profit share must lie in (0, 1), got {mean_profit_share!r}")
    sigma = float(mean_profit_share)
    alpha = 1.0 - gamma / (1.0 - sigma)
    if not 0 < alpha < 1:
        raise EstimationError(f"inconsistent moments: gamma={gamma!r}, sigma={sigma!r} give alpha={alpha!r}")
    return sigma, alpha


def estimate_technology(records, rental_rate: float, order: int = 5, scale: str = "log",
                        fixed_effects: bool = False):
    """Pooled estimate for one technology's records: (TechnologyParams without A/c, ElasticityEstimate).

    ``fixed_effects`` adds survey dummies, absorbing cross-survey differences in prices and TFP.
    """
    y = [r.sales for r in records]
    n = [r.labor_cost for r in records]
    k = [r.capital for r in records]
    m = [r.intermediate_cost for r in records]
    groups = [r.survey_id for r in records] if fixed_effects else None
    est = estimate_labor_elasticity(y, n, k, m, order=order, scale=scale, groups=groups)
    sigma, alpha = recover_sigma_alpha(est.gamma, mean_profit_share(records, rental_rate))
    return TechnologyParams(A=1.0, sigma=sigma, alpha=alpha), est
