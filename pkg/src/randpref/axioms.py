"""Revealed-preference axioms on a single consumer's price-quantity series."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError

DEFAULT_TOL = 1e-9


class Axiom(enum.Enum):
    WARP = "warp"
    WGARP = "wgarp"
    SARP = "sarp"

    @classmethod
    def parse(cls, value) -> "Axiom":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValidationError(f"unknown axiom {value!r}") from None


@dataclass(frozen=True)
class DemandObservationSeries:
    """Prices ``(T, L)`` and chosen bundles ``(T, L)``, one row per period."""

    prices: np.ndarray
    bundles: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.prices, dtype=float))
        y = np.atleast_2d(np.asarray(self.bundles, dtype=float))
        if p.shape != y.shape or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValidationError(
                f"prices {p.shape} and bundles {y.shape} must share a (T, L) shape"
            )
        if np.any(p <= 0):
            raise ValidationError("prices must be strictly positive")
        if np.any(y < 0):
            raise ValidationError("bundles must be nonnegative")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "bundles", y)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Sequence[float], Sequence[float]]]):
        return cls([p for p, _ in pairs], [y for _, y in pairs])

    @property
    def n_periods(self) -> int:
        return self.prices.shape[0]


@dataclass(frozen=True)
class RevealedRelations:
    """``weak[t, s]``: y_t directly revealed weakly preferred to y_s."""

    weak: np.ndarray
    strict: np.ndarray


@dataclass(frozen=True)
class AxiomReport:
    axiom: Axiom
    holds: bool
    witness: Optional[Tuple[int, ...]]
    relations: RevealedRelations


def build_revealed_relations(
    series: DemandObservationSeries, tol: float = DEFAULT_TOL
) -> RevealedRelations:
    # cost[t, s] = p_t . y_s
    cost = series.prices @ series.bundles.T
    own = np.diag(cost)[:, None]
    slack = tol * np.abs(own)
    weak = own >= cost - slack
    strict = own > cost + slack
    return RevealedRelations(weak=weak, strict=strict)


def _distinct(series: DemandObservationSeries, t: int, s: int, tol: float) -> bool:
    return not np.allclose(series.bundles[t], series.bundles[s], rtol=tol, atol=tol)


def _path(adj: np.ndarray, start: int, goal: int) -> Optional[List[int]]:
    prev = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == goal:
            out = []
            while u is not None:
                out.append(u)
                u = prev[u]
            return out[::-1]
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in prev:
                prev[v] = u
                queue.append(v)
    return None


def _rotate(cycle: List[int]) -> Tuple[int, ...]:
    k = cycle.index(min(cycle))
    return tuple(cycle[k:] + cycle[:k])


def check_axiom(
    series: DemandObservationSeries, axiom, tol: float = DEFAULT_TOL
) -> AxiomReport:
    """Test WARP, WGARP or SARP.

    The SARP witness is a revealed-preference cycle starting at its smallest
    period index; WARP and WGARP witnesses are ordered pairs.
    """
    axiom = Axiom.parse(axiom)
    rel = build_revealed_relations(series, tol)
    T = series.n_periods
    weak, strict = rel.weak, rel.strict

    if axiom is Axiom.WARP:
        for t in range(T):
            for s in range(t + 1, T):
                if weak[t, s] and weak[s, t] and _distinct(series, t, s, tol):
                    return AxiomReport(axiom, False, (t, s), rel)
    elif axiom is Axiom.WGARP:
        for t in range(T):
            for s in range(T):
                if t != s and weak[t, s] and strict[s, t]:
                    return AxiomReport(axiom, False, (t, s), rel)
    else:
        adj = weak.copy()
        np.fill_diagonal(adj, False)
        for s in range(T):
            for t in np.flatnonzero(adj[s]):
                t = int(t)
                if not _distinct(series, t, s, tol):
                    continue
                path = _path(adj, t, s)
                if path is not None:
                    return AxiomReport(axiom, False, _rotate(path), rel)
    return AxiomReport(axiom, True, None, rel)
