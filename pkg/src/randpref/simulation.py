"""Synthetic populations with nontransitive Shafer-type preferences, and the
Monte Carlo harness for size and power of the bootstrap test."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from .budgets import Budget
from .errors import ConfigurationError, SolverError, ValidationError
from .rational_types import infer_blocks
from .stochastic_test import Observations, bootstrap_test


class ShaferDomainError(ValidationError):
    """Arguments outside the domain of the Shafer preference function."""


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ShaferDomainError(f"alpha must lie in (0, 1), got {alpha}")
    return alpha


def shafer_value(alpha: float, x, y) -> float:
    """Generalized Shafer preference function ``r_alpha(x, y)``.

    Positive values mean ``x`` is preferred to ``y``. Both bundles need
    strictly positive first and third components.
    """
    alpha = _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (3,) or y.shape != (3,):
        raise ShaferDomainError("bundles must have three goods")
    if x[0] <= 0 or y[0] <= 0 or x[2] <= 0 or y[2] <= 0 or x[1] < 0 or y[1] < 0:
        raise ShaferDomainError(
            "first and third components must be positive, second nonnegative"
        )
    return float(
        x[1] ** alpha * y[0] ** (alpha - 1)
        + np.log(x[2])
        - y[1] ** alpha * x[0] ** (alpha - 1)
        - np.log(y[2])
    )


def shafer_gradient(alpha: float, x, y) -> np.ndarray:
    """Partial derivatives of ``r_alpha(., y)`` at ``x``."""
    alpha = _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.array(
        [
            (1 - alpha) * y[1] ** alpha * x[0] ** (alpha - 2),
            alpha * x[1] ** (alpha - 1) * y[0] ** (alpha - 1),
            1.0 / x[2],
        ]
    )


def shafer_hessian_diagonal(alpha: float, x, y) -> np.ndarray:
    """Own second partials of ``r_alpha(., y)`` at ``x``."""
    alpha = _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.array(
        [
            (1 - alpha) * (alpha - 2) * y[1] ** alpha * x[0] ** (alpha - 3),
            alpha * (alpha - 1) * x[1] ** (alpha - 2) * y[0] ** (alpha - 1),
            -1.0 / x[2] ** 2,
        ]
    )


def shafer_demand(alpha: float, prices, wealth: float) -> np.ndarray:
    """Bundle ``y`` on the budget with ``r_alpha(y, z) >= 0`` for all affordable ``z``.

    The first-order conditions at the diagonal pin ``y2`` and ``y3`` as
    functions of ``y1``; the budget then leaves a scalar equation in ``y1``
    whose left side is strictly increasing, solved by bracketing.
    """
    alpha = _check_alpha(alpha)
    p = np.asarray(prices, dtype=float)
    if p.shape != (3,) or np.any(p <= 0) or not wealth > 0:
        raise ShaferDomainError("need three positive prices and positive wealth")
    p1, p2, p3 = p
    k = alpha * p1 / ((1 - alpha) * p2)
    target = (1 - alpha) * wealth / p1
    g = lambda y1: y1 + y1 ** (2 - 2 * alpha) / k**alpha - target
    hi = target
    if g(hi) < 0:  # cannot happen: second term is positive
        raise SolverError("demand equation has no bracket")
    y1 = brentq(g, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if y1 <= 0:
        raise SolverError("demand equation has no positive root")
    y2 = k * y1
    y3 = p1 / (p3 * (1 - alpha) * y2**alpha * y1 ** (alpha - 2))
    # Remove the last rounding drift on the budget identity.
    y = np.array([y1, y2, y3])
    return y * (wealth / float(p @ y))


def shafer_demand_many(alphas, prices, wealth: float) -> np.ndarray:
    """Vectorized :func:`shafer_demand` over many ``alpha`` values.

    Solves the same scalar equation by bisection on the whole batch, then
    polishes with Newton steps.
    """
    a = np.asarray(alphas, dtype=float)
    if np.any((a <= 0) | (a >= 1)):
        raise ShaferDomainError("alpha must lie in (0, 1)")
    p = np.asarray(prices, dtype=float)
    if p.shape != (3,) or np.any(p <= 0) or not wealth > 0:
        raise ShaferDomainError("need three positive prices and positive wealth")
    p1, p2, p3 = p
    k = a * p1 / ((1 - a) * p2)
    target = (1 - a) * wealth / p1
    e = 2 - 2 * a

    def g(y1):
        return y1 + y1**e / k**a - target

    lo = np.zeros_like(a)
    hi = target.copy()
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        neg = g(mid) < 0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
        if np.all(hi - lo <= 4 * np.finfo(float).eps * hi):
            break
    y1 = 0.5 * (lo + hi)
    for _ in range(2):
        dg = 1 + e * y1 ** (e - 1) / k**a
        y1 = np.clip(y1 - g(y1) / dg, lo, hi)
    y2 = k * y1
    y3 = p1 / (p3 * (1 - a) * y2**a * y1 ** (a - 2))
    y = np.column_stack([y1, y2, y3])
    return y * (wealth / (y @ p))[:, None]


AlphaDistribution = Union[str, float, Callable[[np.random.Generator, int], np.ndarray]]


def _draw_alpha(dist: AlphaDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    if callable(dist):
        a = np.asarray(dist(rng, n), dtype=float)
    elif isinstance(dist, str):
        if dist != "uniform":
            raise ValidationError(f"unknown alpha distribution {dist!r}")
        a = rng.random(n)
        # 0 is possible from Generator.random; redraw such points
        while np.any(a <= 0.0):
            bad = a <= 0.0
            a[bad] = rng.random(int(bad.sum()))
    else:
        a = np.full(n, float(dist))
    if a.shape != (n,) or np.any((a <= 0) | (a >= 1)):
        raise ValidationError("alpha draws must lie in (0, 1)")
    return a


def simulate_population(
    budgets: Sequence[Budget],
    n_per_period: Union[int, Sequence[int]],
    alpha_distribution: AlphaDistribution = "uniform",
    seed: int = 0,
) -> Observations:
    """Fresh households each period, each maximizing its own ``r_alpha``."""
    T = len(budgets)
    ns = [int(n_per_period)] * T if np.isscalar(n_per_period) else [int(n) for n in n_per_period]
    if len(ns) != T or min(ns) < 1:
        raise ValidationError("need a positive sample size per period")
    for b in budgets:
        if b.dim != 3:
            raise ValidationError("the Shafer model has three goods")
    periods, bundles = [], []
    for t, (b, n) in enumerate(zip(budgets, ns)):
        rng = np.random.default_rng([seed, t])
        alphas = _draw_alpha(alpha_distribution, rng, n)
        bundles.append(shafer_demand_many(alphas, b.prices, b.expenditure))
        periods.append(np.full(n, t))
    return Observations(np.concatenate(periods), np.vstack(bundles))


@dataclass(frozen=True)
class PowerStudyConfig:
    gamma: np.ndarray
    rho_true: np.ndarray
    sample_sizes: Tuple[int, ...] = (100, 200, 500, 1000, 2500)
    simulations: int = 99
    bootstrap: int = 200
    levels: Tuple[float, ...] = (0.05, 0.01)
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        g = np.asarray(getattr(self.gamma, "entries", self.gamma), dtype=float)
        object.__setattr__(self, "gamma", g)
        rho = np.asarray(self.rho_true, dtype=float)
        object.__setattr__(self, "rho_true", rho)
        sizes = infer_blocks(g)
        edges = np.cumsum([0] + sizes)
        for a, b in zip(edges[:-1], edges[1:]):
            if abs(rho[a:b].sum() - 1.0) > 1e-9:
                raise ConfigurationError(f"rho_true block {a}:{b} sums to {rho[a:b].sum()}")
        if self.simulations < 1 or self.bootstrap < 1:
            raise ConfigurationError("simulations and bootstrap must be positive")
        if any(not 0 < a < 1 for a in self.levels):
            raise ConfigurationError("levels must lie in (0, 1)")

    @property
    def block_sizes(self) -> List[int]:
        return infer_blocks(self.gamma)


@dataclass(frozen=True)
class PowerTable:
    """Rejection proportions indexed by ``(sample size, level)``."""

    sample_sizes: Tuple[int, ...]
    levels: Tuple[float, ...]
    rejection: np.ndarray  # (len(sizes), len(levels))
    p_values: np.ndarray = field(repr=False)  # (len(sizes), simulations)

    def proportion(self, n: int, level: float) -> float:
        return float(self.rejection[self.sample_sizes.index(n), self.levels.index(level)])

    def to_csv(self) -> str:
        head = "sample_size," + ",".join(f"reject_{a:g}" for a in self.levels)
        rows = [
            f"{n}," + ",".join(f"{v:.4f}" for v in self.rejection[i])
            for i, n in enumerate(self.sample_sizes)
        ]
        return "\n".join([head] + rows) + "\n"


def _one_simulation(args) -> float:
    gamma, rho, sizes, n, seed, k, R = args
    rng = np.random.default_rng([seed, n, k])
    edges = np.cumsum([0] + list(sizes))
    sample = np.concatenate(
        [rng.multinomial(n, rho[a:b] / rho[a:b].sum()) / n for a, b in zip(edges[:-1], edges[1:])]
    )
    rep = bootstrap_test(gamma, sample, [n] * len(sizes), R=R, seed=[seed, n, k, 1])
    return rep.p_value


def monte_carlo_power(config: PowerStudyConfig) -> PowerTable:
    """Rejection frequencies of the bootstrap test under ``rho_true``."""
    sizes = config.block_sizes
    pvals = np.empty((len(config.sample_sizes), config.simulations))
    for i, n in enumerate(config.sample_sizes):
        jobs = [
            (config.gamma, config.rho_true, sizes, n, config.seed, k, config.bootstrap)
            for k in range(config.simulations)
        ]
        if config.n_jobs == 1:
            pvals[i] = [_one_simulation(j) for j in jobs]
        else:
            with ProcessPoolExecutor(max_workers=config.n_jobs) as ex:
                pvals[i] = list(ex.map(_one_simulation, jobs, chunksize=8))
    rej = np.array([[np.mean(pvals[i] <= a) for a in config.levels] for i in range(len(config.sample_sizes))])
    return PowerTable(tuple(config.sample_sizes), tuple(config.levels), rej, pvals)
