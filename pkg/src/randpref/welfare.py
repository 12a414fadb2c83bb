"""Patch dominance, welfare bounds and counterfactual-demand bounds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .axioms import Axiom
from .budgets import (
    Budget,
    NormalizedBudget,
    PatchPartition,
    Side,
    _coerce_normalized,
    compute_patch_partition,
    patch_linear_bounds,
)
from .cone import FEAS_TOL, feasibility, lp_solve, _as_float_matrix
from .errors import NotRationalizable, SolverError, ValidationError
from .rational_types import (
    DEFAULT_COLUMN_CAP,
    TypeMatrix,
    enumerate_types,
)


def dominates(partition: PatchPartition, t: int, i: int, s: int, j: int) -> bool:
    """Whether patch ``i`` of budget ``t`` dominates patch ``j`` of budget ``s``."""
    if t == s:
        return False
    return (
        partition.patch(s, j).side(t) is Side.BELOW
        and partition.patch(t, i).side(s) is Side.ABOVE
    )


@dataclass(frozen=True)
class DominanceRelation:
    """``flags[(t, s)][i, j]``: patch ``i|t`` dominates patch ``j|s``."""

    flags: dict

    def __call__(self, t: int, i: int, s: int, j: int) -> bool:
        return bool(self.flags[(t, s)][i, j])


def dominance_relation(partition: PatchPartition) -> DominanceRelation:
    T = partition.n_budgets
    flags = {}
    for t in range(T):
        for s in range(T):
            if t == s:
                continue
            f = np.zeros((len(partition.patches_by_budget[t]), len(partition.patches_by_budget[s])), bool)
            for i in range(f.shape[0]):
                for j in range(f.shape[1]):
                    f[i, j] = dominates(partition, t, i, s, j)
            flags[(t, s)] = f
    return DominanceRelation(flags)


def type_choices(gamma: TypeMatrix, partition: PatchPartition) -> np.ndarray:
    """Chosen local patch per budget for every column, shape ``(H, T)``."""
    if gamma.choices is not None:
        return np.asarray(gamma.choices)
    e = gamma.entries
    if e.shape[0] != partition.n_rows:
        raise ValidationError("type matrix rows do not match the partition")
    ch = np.empty((e.shape[1], partition.n_budgets), dtype=np.int64)
    for t in range(partition.n_budgets):
        blk = e[partition.block(t)]
        if np.any(blk.sum(0) != 1):
            raise ValidationError(f"block {t} does not select one patch per type")
        ch[:, t] = blk.argmax(0)
    return ch


def budget_preference_indicator(
    gamma: TypeMatrix, partition: PatchPartition, t: int, s: int
) -> np.ndarray:
    """1 for types whose choice on ``t`` dominates their choice on ``s``."""
    if t == s:
        raise ValidationError("indicator needs two distinct budgets")
    ch = type_choices(gamma, partition)
    rel = dominance_relation(partition).flags[(t, s)]
    return rel[ch[:, t], ch[:, s]].astype(np.uint8)


@dataclass(frozen=True)
class WelfareBounds:
    """Bounds on the share of consumers better off under budget ``t`` than ``s``.

    ``revealed_interval`` bounds the share *revealed* better off;
    ``better_off_interval`` bounds the share actually better off.
    """

    t: int
    s: int
    gamma_lower: float
    gamma_upper: float
    beta_lower: float

    @property
    def revealed_interval(self) -> Tuple[float, float]:
        return (self.gamma_lower, self.gamma_upper)

    @property
    def better_off_interval(self) -> Tuple[float, float]:
        return (self.gamma_lower, 1.0 - self.beta_lower)


def _bound(objective, A_eq, b_eq, sense: str) -> float:
    res = lp_solve(objective, A_eq=A_eq, b_eq=b_eq, bounds=(0.0, None), sense=sense)
    if not res.optimal:
        if res.status.value == "infeasible":
            raise NotRationalizable("choice probabilities are outside the type cone")
        raise SolverError(f"bound program returned {res.status.value}")
    return float(res.value)


def welfare_bounds(
    gamma: TypeMatrix,
    partition: PatchPartition,
    rho,
    t: int,
    s: int,
    feas_tol: float = FEAS_TOL,
) -> WelfareBounds:
    A = _as_float_matrix(gamma)
    rho = np.asarray(getattr(rho, "values", rho), dtype=float)
    if not feasibility(A, rho, tol=feas_tol).feasible:
        raise NotRationalizable("choice probabilities are outside the type cone")
    ind_ts = budget_preference_indicator(gamma, partition, t, s).astype(float)
    ind_st = budget_preference_indicator(gamma, partition, s, t).astype(float)
    lo = _bound(ind_ts, A, rho, "min")
    hi = _bound(ind_ts, A, rho, "max")
    beta = _bound(ind_st, A, rho, "min")
    clip = lambda v: float(min(1.0, max(0.0, v)))
    return WelfareBounds(t, s, clip(lo), clip(hi), clip(beta))


@dataclass(frozen=True)
class CounterfactualSetup:
    """Types over the observed budgets plus a counterfactual budget.

    The counterfactual budget has index 0 in ``partition``; observed budget
    ``t`` has index ``t + 1``. Observed choice probabilities are matched
    through ``aggregation @ gamma_tilde @ nu == rho``, which pools refined
    observed patches back onto the patches the data were recorded on.
    """

    partition: PatchPartition
    observed_partition: PatchPartition
    types: TypeMatrix
    gamma_tilde: np.ndarray
    gamma_0: np.ndarray
    aggregation: np.ndarray
    rho: np.ndarray
    duplicate_of: Optional[int] = None

    @property
    def constraint_matrix(self) -> np.ndarray:
        return self.aggregation @ self.gamma_tilde

    @property
    def n_counterfactual_patches(self) -> int:
        return self.gamma_0.shape[0]

    @property
    def counterfactual_patches(self):
        if self.duplicate_of is not None:
            return self.observed_partition.patches_by_budget[self.duplicate_of]
        return self.partition.patches_by_budget[0]


def counterfactual_setup(
    budgets: Sequence,
    rho,
    p0,
    w0: float,
    axiom=Axiom.WARP,
    epsilon: float = 1e-9,
    cap: int = DEFAULT_COLUMN_CAP,
) -> CounterfactualSetup:
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 <= 0) or not w0 > 0:
        raise ValidationError("counterfactual prices and wealth must be positive")
    observed = _coerce_normalized(budgets)
    rho = np.asarray(getattr(rho, "values", rho), dtype=float)
    obs_part = compute_patch_partition(observed, epsilon)
    if rho.shape != (obs_part.n_rows,):
        raise ValidationError(
            f"rho has {rho.size} entries, observed partition has {obs_part.n_rows} patches"
        )
    q0 = p0 / w0
    for b in observed:
        if np.allclose(b.normalized_prices, q0, rtol=1e-12, atol=0.0):
            # Same menu: every type must pick the same patch again.
            types = enumerate_types(obs_part, axiom, cap=cap)
            g = types.as_float()
            return CounterfactualSetup(
                partition=obs_part,
                observed_partition=obs_part,
                types=types,
                gamma_tilde=g,
                gamma_0=g[obs_part.block(b.period_index)],
                aggregation=np.eye(obs_part.n_rows),
                rho=rho,
                duplicate_of=b.period_index,
            )

    ext = [NormalizedBudget(q0, 0)] + [
        NormalizedBudget(b.normalized_prices, b.period_index + 1) for b in observed
    ]
    part = compute_patch_partition(ext, epsilon)
    types = enumerate_types(part, axiom, cap=cap)
    g = types.as_float()
    n0 = len(part.patches_by_budget[0])
    gamma_0 = g[:n0]
    gamma_tilde = g[n0:]
    agg = np.zeros((obs_part.n_rows, part.n_rows - n0))
    for t in range(obs_part.n_budgets):
        for p in part.patches_by_budget[t + 1]:
            label = "".join(sd.letter for s, sd in p.sign_vector if s != 0)
            coarse = obs_part.row_index(t, obs_part.find(t, label))
            agg[coarse, part.row_index(t + 1, p.local_index) - n0] = 1.0
    return CounterfactualSetup(
        partition=part,
        observed_partition=obs_part,
        types=types,
        gamma_tilde=gamma_tilde,
        gamma_0=gamma_0,
        aggregation=agg,
        rho=rho,
    )


def _check_rationalizable(setup: CounterfactualSetup, feas_tol: float) -> None:
    if not feasibility(setup.constraint_matrix, setup.rho, tol=feas_tol).feasible:
        raise NotRationalizable("observed choice probabilities are not rationalizable")


def counterfactual_patch_probability_bounds(
    setup: CounterfactualSetup, i: int, feas_tol: float = FEAS_TOL
) -> Tuple[float, float]:
    """Sharp bounds on the probability of counterfactual patch ``i``."""
    if not 0 <= i < setup.n_counterfactual_patches:
        raise ValidationError(f"counterfactual budget has no patch {i}")
    _check_rationalizable(setup, feas_tol)
    obj = setup.gamma_0[i]
    M = setup.constraint_matrix
    return _bound(obj, M, setup.rho, "min"), _bound(obj, M, setup.rho, "max")


def counterfactual_expectation_bounds(
    setup: CounterfactualSetup, z0, feas_tol: float = FEAS_TOL
) -> Tuple[float, float]:
    """Bounds on ``E[z0 . y]`` for demand on the counterfactual budget."""
    z0 = np.asarray(z0, dtype=float)
    part = setup.observed_partition if setup.duplicate_of is not None else setup.partition
    if z0.shape != (part.dim,):
        raise ValidationError(f"coefficients must have length {part.dim}")
    _check_rationalizable(setup, feas_tol)
    h = np.array([patch_linear_bounds(part, p, z0) for p in setup.counterfactual_patches])
    M = setup.constraint_matrix
    lo = _bound(h[:, 0] @ setup.gamma_0, M, setup.rho, "min")
    hi = _bound(h[:, 1] @ setup.gamma_0, M, setup.rho, "max")
    return lo, hi


def expenditure_share_coefficients(p0, w0: float, good: int) -> np.ndarray:
    """Coefficients making the expenditure share of ``good`` linear on the budget."""
    p0 = np.asarray(p0, dtype=float)
    z = np.zeros_like(p0)
    z[good] = p0[good] / w0
    return z
