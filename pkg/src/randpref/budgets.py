"""Budget hyperplanes and their patch partition.

A budget ``{y >= 0 : p~ . y = 1}`` (prices divided by expenditure) is cut by
every other budget hyperplane into regions lying strictly below or strictly
above it. Each nonempty sign pattern is a *patch*; points on two hyperplanes
at once carry no probability mass and are not patches.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cone import lp_solve
from .errors import (
    DuplicateBudgetError,
    OffBudgetError,
    SolverError,
    UnknownPatchError,
    ValidationError,
)

DEFAULT_EPSILON = 1e-9
DEFAULT_TIE_TOLERANCE = 1e-9


class Side(enum.IntEnum):
    BELOW = 0
    ABOVE = 1

    @property
    def letter(self) -> str:
        return "B" if self is Side.BELOW else "A"


class TiePolicy(enum.Enum):
    """What to do with a bundle sitting on another budget's hyperplane."""

    ERROR = "error"
    DROP = "drop"
    ASSIGN_BELOW = "assign-below"


class _OnIntersection:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "ON_INTERSECTION"


ON_INTERSECTION = _OnIntersection()


@dataclass(frozen=True)
class Budget:
    prices: np.ndarray
    expenditure: float

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "expenditure", float(self.expenditure))
        if p.ndim != 1 or p.size < 2:
            raise ValidationError(f"a budget needs at least two prices, got {p.shape}")
        if not np.all(np.isfinite(p)) or not np.isfinite(self.expenditure):
            raise ValidationError("prices and expenditure must be finite")

    @property
    def dim(self) -> int:
        return self.prices.size


@dataclass(frozen=True)
class NormalizedBudget:
    normalized_prices: np.ndarray
    period_index: int

    @property
    def dim(self) -> int:
        return self.normalized_prices.size


def normalize_budgets(budgets: Sequence[Budget]) -> List[NormalizedBudget]:
    """Divide each budget's prices by its expenditure."""
    out = []
    for t, b in enumerate(budgets):
        bad = np.flatnonzero(b.prices <= 0)
        if bad.size:
            raise ValidationError(
                f"budget {t}: price component {int(bad[0])} is {b.prices[bad[0]]!r}, "
                "prices must be strictly positive"
            )
        if b.expenditure <= 0:
            raise ValidationError(
                f"budget {t}: expenditure is {b.expenditure!r}, must be strictly positive"
            )
        out.append(NormalizedBudget(b.prices / b.expenditure, t))
    return out


def _coerce_normalized(budgets) -> List[NormalizedBudget]:
    items = list(budgets)
    if items and all(isinstance(b, Budget) for b in items):
        return normalize_budgets(items)
    out = []
    for t, b in enumerate(items):
        if isinstance(b, NormalizedBudget):
            p = np.asarray(b.normalized_prices, dtype=float)
        else:
            p = np.asarray(b, dtype=float)
        if p.ndim != 1 or p.size < 2:
            raise ValidationError(f"budget {t}: need a vector of at least two prices")
        bad = np.flatnonzero(~(p > 0))
        if bad.size:
            raise ValidationError(
                f"budget {t}: normalized price component {int(bad[0])} must be positive"
            )
        out.append(NormalizedBudget(p, t))
    return out


@dataclass(frozen=True)
class Patch:
    """One region of a budget hyperplane with a fixed position to all others.

    ``sign_vector`` pairs each other period ``s`` (ascending) with the side of
    budget ``s`` on which the region lies. ``witness`` is the max-slack point
    found when the patch was certified nonempty.
    """

    owner_budget: int
    sign_vector: Tuple[Tuple[int, Side], ...]
    local_index: int
    witness: np.ndarray = field(repr=False, compare=False)
    slack: float = field(repr=False, compare=False, default=0.0)

    def side(self, s: int) -> Side:
        for other, sd in self.sign_vector:
            if other == s:
                return sd
        raise KeyError(f"patch of budget {self.owner_budget} has no sign for {s}")

    @property
    def label(self) -> str:
        return "".join(sd.letter for _, sd in self.sign_vector)

    @property
    def key(self) -> Tuple[int, str]:
        return (self.owner_budget, self.label)


@dataclass(frozen=True)
class PatchPartition:
    budgets: Tuple[NormalizedBudget, ...]
    patches_by_budget: Tuple[Tuple[Patch, ...], ...]
    epsilon: float = DEFAULT_EPSILON

    @property
    def n_budgets(self) -> int:
        return len(self.budgets)

    @property
    def dim(self) -> int:
        return self.budgets[0].dim

    @property
    def global_row_order(self) -> List[Patch]:
        return [p for block in self.patches_by_budget for p in block]

    @property
    def n_rows(self) -> int:
        return sum(len(b) for b in self.patches_by_budget)

    @property
    def block_sizes(self) -> List[int]:
        return [len(b) for b in self.patches_by_budget]

    @property
    def offsets(self) -> List[int]:
        return [0] + list(itertools.accumulate(self.block_sizes))[:-1]

    def block(self, t: int) -> slice:
        start = self.offsets[t]
        return slice(start, start + len(self.patches_by_budget[t]))

    def row_index(self, t: int, i: int) -> int:
        return self.offsets[t] + i

    def patch(self, t: int, i: int) -> Patch:
        return self.patches_by_budget[t][i]

    def prices(self, t: int) -> np.ndarray:
        return self.budgets[t].normalized_prices

    def side_table(self) -> List[np.ndarray]:
        """Per budget, an ``I_t x T`` int array of sides (-1 on the diagonal)."""
        T = self.n_budgets
        tables = []
        for t, block in enumerate(self.patches_by_budget):
            tab = np.full((len(block), T), -1, dtype=np.int8)
            for i, p in enumerate(block):
                for s, sd in p.sign_vector:
                    tab[i, s] = int(sd)
            tables.append(tab)
        return tables

    def row_keys(self) -> List[Tuple[int, str]]:
        return [p.key for p in self.global_row_order]

    def find(self, t: int, label: str) -> int:
        for p in self.patches_by_budget[t]:
            if p.label == label:
                return p.local_index
        raise UnknownPatchError(f"budget {t} has no patch with signs {label!r}")


def _max_slack(
    p_own: np.ndarray,
    constraints: Sequence[Tuple[np.ndarray, Side]],
) -> Tuple[float, np.ndarray]:
    L = p_own.size
    c = np.zeros(L + 1)
    c[-1] = 1.0
    A_eq = np.concatenate([p_own, [0.0]])[None, :]
    rows, rhs = [], []
    for p, sd in constraints:
        if sd is Side.BELOW:
            rows.append(np.concatenate([p, [1.0]]))
            rhs.append(1.0)
        else:
            rows.append(np.concatenate([-p, [1.0]]))
            rhs.append(-1.0)
    res = lp_solve(
        c,
        A_eq=A_eq,
        b_eq=[1.0],
        A_ub=np.array(rows) if rows else None,
        b_ub=np.array(rhs) if rows else None,
        bounds=[(0.0, None)] * L + [(None, 1.0)],
        sense="max",
    )
    if not res.optimal:
        raise SolverError(f"patch certification program returned {res.status.value}")
    return res.value, res.x[:L]


def compute_patch_partition(budgets, epsilon: float = DEFAULT_EPSILON) -> PatchPartition:
    """Certify every nonempty sign pattern of every budget hyperplane.

    Sign vectors are grown depth-first over ascending periods; a prefix whose
    maximal strict slack is below ``epsilon`` is pruned, since adding
    constraints can only shrink the region.
    """
    normed = _coerce_normalized(budgets)
    if not normed:
        raise ValidationError("need at least one budget")
    L = normed[0].dim
    for b in normed:
        if b.dim != L:
            raise ValidationError(
                f"budget {b.period_index} has {b.dim} goods, expected {L}"
            )
    for a, b in itertools.combinations(range(len(normed)), 2):
        pa, pb = normed[a].normalized_prices, normed[b].normalized_prices
        if np.allclose(pa, pb, rtol=1e-12, atol=0.0):
            raise DuplicateBudgetError(a, b)

    T = len(normed)
    blocks = []
    for t in range(T):
        own = normed[t].normalized_prices
        others = [s for s in range(T) if s != t]
        found: List[Tuple[Tuple[Tuple[int, Side], ...], np.ndarray, float]] = []

        def grow(prefix: List[Tuple[int, Side]]):
            depth = len(prefix)
            if depth == len(others):
                cons = [(normed[s].normalized_prices, sd) for s, sd in prefix]
                slack, point = _max_slack(own, cons)
                if slack >= epsilon:
                    found.append((tuple(prefix), point, slack))
                return
            s = others[depth]
            for sd in (Side.BELOW, Side.ABOVE):
                trial = prefix + [(s, sd)]
                if depth + 1 < len(others):
                    cons = [(normed[o].normalized_prices, d) for o, d in trial]
                    slack, _ = _max_slack(own, cons)
                    if slack < epsilon:
                        continue
                grow(trial)

        grow([])
        blocks.append(
            tuple(
                Patch(t, sv, i, witness=pt, slack=sl)
                for i, (sv, pt, sl) in enumerate(found)
            )
        )
    return PatchPartition(tuple(normed), tuple(blocks), epsilon)


def bundle_signs(
    partition: PatchPartition,
    t: int,
    y,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
) -> Tuple[float, List[Tuple[int, float]]]:
    """Own-budget deviation and ``(s, p~_s . y - 1)`` for every other period."""
    y = np.asarray(y, dtype=float)
    if y.shape != (partition.dim,):
        raise ValidationError(f"bundle has shape {y.shape}, expected ({partition.dim},)")
    if np.any(y < 0):
        raise ValidationError("bundle components must be nonnegative")
    own = float(partition.prices(t) @ y - 1.0)
    return own, [
        (s, float(partition.prices(s) @ y - 1.0))
        for s in range(partition.n_budgets)
        if s != t
    ]


def classify_bundle(
    partition: PatchPartition,
    t: int,
    y,
    tie_tolerance: float = DEFAULT_TIE_TOLERANCE,
    tie_policy: TiePolicy = TiePolicy.ERROR,
):
    """Return the local index of the patch of budget ``t`` containing ``y``.

    Returns :data:`ON_INTERSECTION` when ``y`` is within ``tie_tolerance`` of
    another budget hyperplane, unless ``tie_policy`` is ``ASSIGN_BELOW``, in
    which case ties count as below. What to do with an intersection result is
    the caller's decision.
    """
    own, devs = bundle_signs(partition, t, y, tie_tolerance)
    if abs(own) > tie_tolerance:
        raise OffBudgetError(t, own)
    label = []
    for _, d in devs:
        if abs(d) <= tie_tolerance:
            if tie_policy is not TiePolicy.ASSIGN_BELOW:
                return ON_INTERSECTION
            label.append("B")
        else:
            label.append("B" if d < 0 else "A")
    return partition.find(t, "".join(label))


def patch_linear_bounds(
    partition: PatchPartition, patch: Patch, c
) -> Tuple[float, float]:
    """Infimum and supremum of ``c . y`` over the closure of a patch."""
    c = np.asarray(c, dtype=float)
    t = patch.owner_budget
    own = partition.prices(t)
    rows, rhs = [], []
    for s, sd in patch.sign_vector:
        p = partition.prices(s)
        if sd is Side.BELOW:
            rows.append(p)
            rhs.append(1.0)
        else:
            rows.append(-p)
            rhs.append(-1.0)
    kw = dict(
        A_eq=own[None, :],
        b_eq=[1.0],
        A_ub=np.array(rows) if rows else None,
        b_ub=np.array(rhs) if rows else None,
        bounds=(0.0, None),
    )
    lo = lp_solve(c, sense="min", **kw)
    hi = lp_solve(c, sense="max", **kw)
    values = []
    for r in (lo, hi):
        if r.status.value == "unbounded":
            values.append(-np.inf if r is lo else np.inf)
        elif not r.optimal:
            raise SolverError(f"patch bound program returned {r.status.value}")
        else:
            values.append(r.value)
    return values[0], values[1]


@dataclass(frozen=True)
class TriangularWitness:
    triple: Tuple[int, int, int]
    left: int
    direction: str  # "<=" or ">="
    lam_interval: Tuple[float, float]


@dataclass(frozen=True)
class TriangularReport:
    is_triangular: bool
    witnesses: Tuple[TriangularWitness, ...]
    violation: Optional[Tuple[int, int, int]] = None


def _lambda_interval(pt, ps, pk, direction: str, tol: float) -> Optional[Tuple[float, float]]:
    # Need pt <= lam*ps + (1-lam)*pk (or >=) in every component.
    lo, hi = 0.0, 1.0
    sgn = 1.0 if direction == "<=" else -1.0
    for a, b, c in zip(pt, ps, pk):
        # sgn*(c + lam*(b - c) - a) >= 0
        d = sgn * (b - c)
        r = sgn * (a - c)
        if abs(d) <= tol:
            if r > tol:
                return None
            continue
        bound = r / d
        if d > 0:
            lo = max(lo, bound)
        else:
            hi = min(hi, bound)
        if lo > hi + tol:
            return None
    return (lo, max(lo, hi))


def check_triangular_configuration(budgets, tol: float = 1e-12) -> TriangularReport:
    """Check that every triple of normalized price vectors is triangular."""
    normed = _coerce_normalized(budgets)
    prices = [b.normalized_prices for b in normed]
    witnesses = []
    for triple in itertools.combinations(range(len(prices)), 3):
        hit = None
        for left in triple:
            s, k = [x for x in triple if x != left]
            for direction in ("<=", ">="):
                iv = _lambda_interval(prices[left], prices[s], prices[k], direction, tol)
                if iv is not None:
                    hit = TriangularWitness(triple, left, direction, iv)
                    break
            if hit:
                break
        if hit is None:
            return TriangularReport(False, tuple(witnesses), triple)
        witnesses.append(hit)
    return TriangularReport(True, tuple(witnesses))
