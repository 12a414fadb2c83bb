"""Numerical kernels: cone projection, exact feasibility, linear programs.

``nnls`` is an active-set solver in the Lawson--Hanson style, extended with
elementwise lower bounds (by a change of variables) and warm starts. The
linear-program kernel binds HiGHS through :func:`scipy.optimize.linprog`;
Farkas certificates are obtained from an explicit alternative program and
validated by multiplication before they are returned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import linprog

from .errors import SolverError, ValidationError

FEAS_TOL = 1e-8
CERT_TOL = 1e-9
CERT_MARGIN = 1e-9

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}


@dataclass(frozen=True)
class ConeFitResult:
    """Projection of a target onto ``{Gamma @ nu : nu >= lower}``.

    Attributes
    ----------
    nu : ndarray, shape (H,)
        Weights, elementwise at least the supplied lower bound.
    eta : ndarray, shape (d,)
        Fitted point ``Gamma @ nu``.
    squared_residual : float
        ``||rho - eta||**2``.
    converged : bool
        False when the iteration cap was hit; ``nu`` is then the best iterate.
    iterations : int
        Number of least-squares solves performed.
    passive : ndarray of bool
        Coordinates strictly above their lower bound; pass back as
        ``warm_start`` for a closely related problem.
    """

    nu: np.ndarray
    eta: np.ndarray
    squared_residual: float
    converged: bool
    iterations: int
    passive: np.ndarray = field(repr=False)

    @property
    def residual_norm(self) -> float:
        return float(np.sqrt(self.squared_residual))


def _as_float_matrix(gamma) -> np.ndarray:
    a = np.asarray(getattr(gamma, "entries", gamma), dtype=float)
    if a.ndim != 2:
        raise ValidationError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def _passive_lstsq(A: np.ndarray, b: np.ndarray, passive: np.ndarray) -> np.ndarray:
    z = np.zeros(A.shape[1])
    if passive.any():
        z[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
    return z


def nnls(
    gamma,
    rho,
    lower: Union[float, Sequence[float], np.ndarray] = 0.0,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    warm_start: Optional[np.ndarray] = None,
) -> ConeFitResult:
    """Solve ``min ||rho - Gamma nu||^2`` subject to ``nu >= lower``.

    Parameters
    ----------
    gamma : array_like, shape (d, H)
    rho : array_like, shape (d,)
    lower : float or array_like, shape (H,)
        Elementwise lower bound, nonnegative.
    tol : float, optional
        KKT tolerance on the gradient. Defaults to a multiple of machine
        epsilon scaled by the problem size and magnitude.
    max_iter : int, optional
        Cap on least-squares solves (default ``30 * H``).
    warm_start : ndarray of bool, optional
        Initial passive set, typically ``previous_result.passive``.
    """
    A = _as_float_matrix(gamma)
    b = np.asarray(rho, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise ValidationError(f"rho has shape {b.shape}, expected ({m},)")
    lo = np.broadcast_to(np.asarray(lower, dtype=float), (n,)).copy()
    if np.any(lo < 0):
        raise ValidationError("lower bounds must be nonnegative")
    if max_iter is None:
        max_iter = 30 * max(n, 1)
    if tol is None:
        scale = max(1.0, float(np.abs(A).max(initial=0.0))) * max(
            1.0, float(np.abs(b).max(initial=0.0))
        )
        tol = 1e3 * np.finfo(float).eps * max(m, n) * scale

    target = b - A @ lo
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    iterations = 0

    if warm_start is not None:
        passive = np.asarray(warm_start, dtype=bool).copy()
        # Shrink until the passive least-squares solution is strictly positive.
        while passive.any():
            z = _passive_lstsq(A, target, passive)
            iterations += 1
            bad = passive & (z <= 0.0)
            if not bad.any():
                x = z
                break
            passive &= ~bad

    converged = True
    blocked = np.zeros(n, dtype=bool)
    w = A.T @ (target - A @ x)
    while True:
        candidates = ~passive & ~blocked & (w > tol)
        if not candidates.any():
            break
        if iterations >= max_iter:
            converged = False
            break
        j = int(np.argmax(np.where(candidates, w, -np.inf)))
        passive[j] = True
        z = _passive_lstsq(A, target, passive)
        iterations += 1
        if z[j] <= 0.0:
            # Rounding made column j look improving; keep it out until x moves.
            passive[j] = False
            blocked[j] = True
            continue
        while np.any(z[passive] <= 0.0):
            if iterations >= max_iter:
                converged = False
                break
            hit = passive & (z <= 0.0)
            ratios = x[hit] / (x[hit] - z[hit])
            k = int(np.argmin(ratios))
            x = x + ratios[k] * (z - x)
            x[np.flatnonzero(hit)[k]] = 0.0
            passive &= x > 0.0
            x[~passive] = 0.0
            z = _passive_lstsq(A, target, passive)
            iterations += 1
        if not converged:
            break
        x = z
        blocked[:] = False
        w = A.T @ (target - A @ x)

    x = np.where(passive, x, 0.0)
    nu = x + lo
    eta = A @ nu
    resid = b - eta
    return ConeFitResult(
        nu=nu,
        eta=eta,
        squared_residual=float(resid @ resid),
        converged=converged,
        iterations=iterations,
        passive=passive,
    )


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    value: Optional[float]
    x: Optional[np.ndarray]

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def lp_solve(
    c,
    A_eq=None,
    b_eq=None,
    bounds=(0.0, None),
    sense: str = "min",
    A_ub=None,
    b_ub=None,
) -> LPResult:
    """Optimize ``c @ x`` over ``A_eq x = b_eq, A_ub x <= b_ub`` and bounds.

    ``sense`` is ``"min"`` or ``"max"``; the reported value is in the
    caller's sense. Infeasible and unbounded programs are reported through
    ``status``; any other solver outcome raises :class:`SolverError`.
    """
    if sense not in ("min", "max"):
        raise ValidationError(f"sense must be 'min' or 'max', got {sense!r}")
    c = np.asarray(c, dtype=float)
    sign = 1.0 if sense == "min" else -1.0
    res = linprog(
        sign * c,
        A_ub=None if A_ub is None else np.asarray(A_ub, dtype=float),
        b_ub=None if b_ub is None else np.asarray(b_ub, dtype=float),
        A_eq=None if A_eq is None else np.asarray(A_eq, dtype=float),
        b_eq=None if b_eq is None else np.asarray(b_eq, dtype=float),
        bounds=bounds,
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if res.status == 0:
        return LPResult(LPStatus.OPTIMAL, sign * float(res.fun), np.asarray(res.x))
    if res.status == 2:
        return LPResult(LPStatus.INFEASIBLE, None, None)
    if res.status == 3:
        return LPResult(LPStatus.UNBOUNDED, None, None)
    raise SolverError(f"LP solver failed: {res.message}")


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Farkas witness ``y`` with ``y @ Gamma <= 0`` and ``y @ rho > 0``."""

    y: np.ndarray
    gamma_slack: float
    rho_gain: float

    def is_valid(self, cert_tol: float = CERT_TOL, cert_margin: float = CERT_MARGIN) -> bool:
        return self.gamma_slack <= cert_tol and self.rho_gain > cert_margin


@dataclass(frozen=True)
class Feasible:
    nu: np.ndarray
    feasible = True


@dataclass(frozen=True)
class Infeasible:
    certificate: InfeasibilityCertificate
    feasible = False


def make_certificate(gamma, rho, y) -> InfeasibilityCertificate:
    A = _as_float_matrix(gamma)
    y = np.asarray(y, dtype=float)
    return InfeasibilityCertificate(
        y=y,
        gamma_slack=float(np.max(y @ A, initial=-np.inf)),
        rho_gain=float(y @ np.asarray(rho, dtype=float)),
    )


def feasibility(
    gamma,
    rho,
    tol: float = FEAS_TOL,
    cert_tol: float = CERT_TOL,
    cert_margin: float = CERT_MARGIN,
) -> Union[Feasible, Infeasible]:
    """Decide whether ``Gamma nu = rho`` has a solution with ``nu >= 0``.

    Phase one minimizes the L1 violation of the equalities. When it is
    positive, the alternative program ``max y @ rho`` subject to
    ``y @ Gamma <= 0`` and ``-1 <= y <= 1`` yields the certificate.
    """
    A = _as_float_matrix(gamma)
    b = np.asarray(rho, dtype=float)
    m, n = A.shape
    if b.shape != (m,):
        raise ValidationError(f"rho has shape {b.shape}, expected ({m},)")

    eye = np.eye(m)
    phase1 = lp_solve(
        np.concatenate([np.zeros(n), np.ones(2 * m)]),
        A_eq=np.hstack([A, eye, -eye]),
        b_eq=b,
        bounds=(0.0, None),
    )
    if not phase1.optimal:
        raise SolverError(f"phase-one program returned {phase1.status.value}")
    if phase1.value <= tol:
        nu = np.clip(phase1.x[:n], 0.0, None)
        return Feasible(nu=nu)

    alt = lp_solve(b, A_ub=A.T, b_ub=np.zeros(n), bounds=(-1.0, 1.0), sense="max")
    if not alt.optimal:
        raise SolverError(f"certificate program returned {alt.status.value}")
    cert = make_certificate(A, b, alt.x)
    if not cert.is_valid(cert_tol, cert_margin):
        raise SolverError(
            "phase one reported infeasibility but no valid certificate was found "
            f"(slack={cert.gamma_slack:.3e}, gain={cert.rho_gain:.3e})"
        )
    return Infeasible(certificate=cert)
