"""Estimating the MiDS matrix from observed opinions.

With ``c = vec(C)`` (column-major) the update residual is linear in ``c``::

    eps(c) = b - G c,  G = (LW X^T) kron I_m,  b = x_next - ((I - Lambda) kron I_m) u

where ``X = [x_1, ..., x_n]`` holds the previous (or, for steady-state data,
the final) opinions as columns.  The estimate minimises a convex function of
``eps`` over a closed convex set of matrices by projected (sub)gradient
descent.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .graph import maximal_stochastic_subset
from .model import DimensionMismatch, validate_model
from .spectra import spectral_radius

ARMIJO = 1e-4


class Constraint(str, enum.Enum):
    NONE = "none"
    ROW_STOCHASTIC = "stochastic"
    INF_NORM_BALL = "infnorm"


class Objective(str, enum.Enum):
    SUM_SQUARES = "squares"
    SUM_ABS = "abs"
    MAX_ABS = "max"


class IdentificationError(ValueError):
    pass


class InfeasibleConstraintSet(IdentificationError):
    pass


def vec(M) -> np.ndarray:
    """Stack the columns of ``M``."""
    return np.asarray(M, dtype=float).ravel(order="F")


def unvec(v, rows: int, cols: int | None = None) -> np.ndarray:
    cols = rows if cols is None else cols
    return np.asarray(v, dtype=float).reshape((rows, cols), order="F")


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=float), np.asarray(B, dtype=float))


@dataclass
class IdentificationProblem:
    """Known ``W, lam, u`` plus observations.

    ``observations`` holds ``x(1), ..., x(T)`` row-wise for ``mode="finite"``
    or the single steady state ``x'`` for ``mode="infinite"``.
    """

    W: np.ndarray
    lam: np.ndarray
    u: np.ndarray
    m: int
    observations: np.ndarray
    mode: str = "infinite"
    constraint: Constraint = Constraint.ROW_STOCHASTIC
    objective: Objective = Objective.SUM_SQUARES

    def __post_init__(self):
        self.constraint = Constraint(self.constraint)
        self.objective = Objective(self.objective)
        if self.mode not in ("finite", "infinite"):
            raise IdentificationError(f"mode must be 'finite' or 'infinite', not {self.mode!r}")
        skeleton = validate_model(self.W, self.lam, np.eye(self.m), np.asarray(self.u).ravel())
        self.W, self.lam, self.u = skeleton.W, skeleton.lam, skeleton.u
        nm = skeleton.n * self.m
        obs = np.atleast_2d(np.asarray(self.observations, dtype=float))
        if obs.shape[1] != nm:
            raise DimensionMismatch(f"observations have length {obs.shape[1]}, expected {nm}")
        if self.mode == "infinite" and obs.shape[0] != 1:
            raise IdentificationError("infinite-horizon data is a single steady state")
        if obs.shape[0] < 1:
            raise IdentificationError("need at least one observation")
        self.observations = obs
        if self.mode == "infinite" and maximal_stochastic_subset(self.lam[:, None] * self.W):
            raise IdentificationError("steady-state identification needs rho(Lambda W) < 1")

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def T(self) -> int:
        return self.observations.shape[0]


@dataclass
class IdentificationResult:
    C: np.ndarray
    residual: float           # |eps|_2 (sum of squares), |eps|_1 or |eps|_inf
    objective_value: float
    iterations: int
    grad_norm: float
    converged: bool
    condition: float
    rank: int
    approximate: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "C": self.C.tolist(),
            "residual": self.residual,
            "objective_value": self.objective_value,
            "iterations": self.iterations,
            "projected_gradient_norm": self.grad_norm,
            "converged": self.converged,
            "condition_number": self.condition,
            "rank": self.rank,
            "approximate": self.approximate,
            **self.diagnostics,
        }


def assemble_regressors(problem: IdentificationProblem) -> tuple[np.ndarray, np.ndarray]:
    n, m = problem.n, problem.m
    LW = problem.lam[:, None] * problem.W
    inject = ((1.0 - problem.lam)[:, None] * problem.u.reshape(n, m)).ravel()
    obs = problem.observations
    if problem.mode == "infinite":
        pairs = [(obs[0], obs[0])]
    else:
        prev = np.vstack([problem.u[None, :], obs[:-1]])
        pairs = list(zip(prev, obs))
    G_blocks, b_blocks = [], []
    for x_prev, x_next in pairs:
        X_T = x_prev.reshape(n, m)  # row i is x_i, i.e. X^T
        G_blocks.append(kron(LW @ X_T, np.eye(m)))
        b_blocks.append(x_next - inject)
    return np.vstack(G_blocks), np.concatenate(b_blocks)


def _project_simplex_rows(R: np.ndarray, radius: float = 1.0) -> np.ndarray:
    """Project each row of ``R`` onto ``{x >= 0, sum x = radius}`` (sort and threshold)."""
    mu = -np.sort(-R, axis=1)
    css = np.cumsum(mu, axis=1) - radius
    idx = np.arange(1, R.shape[1] + 1)
    active = mu - css / idx > 0
    rho = R.shape[1] - 1 - np.argmax(active[:, ::-1], axis=1)
    theta = css[np.arange(R.shape[0]), rho] / (rho + 1)
    return np.maximum(R - theta[:, None], 0.0)


def _project_l1_rows(R: np.ndarray, radius: float = 1.0) -> np.ndarray:
    out = R.copy()
    outside = np.abs(R).sum(axis=1) > radius
    if np.any(outside):
        Ro = R[outside]
        out[outside] = np.sign(Ro) * _project_simplex_rows(np.abs(Ro), radius)
    return out


def project(c, constraint: Constraint | str, m: int | None = None) -> np.ndarray:
    """Project ``c = vec(C)`` row by row onto the constraint set.

    A 1-D input of length ``m`` (with ``m`` omitted) is treated as one row.
    """
    constraint = Constraint(constraint)
    c = np.asarray(c, dtype=float)
    if constraint is Constraint.NONE:
        return c.copy()
    rows = c[None, :] if m is None else unvec(c, m)
    if constraint is Constraint.ROW_STOCHASTIC:
        out = _project_simplex_rows(rows)
    else:
        out = _project_l1_rows(rows)
    return out[0] if m is None else vec(out)


def _objective(kind: Objective, eps: np.ndarray) -> float:
    if kind is Objective.SUM_SQUARES:
        return float(eps @ eps)
    if kind is Objective.SUM_ABS:
        return float(np.abs(eps).sum())
    return float(np.abs(eps).max())


def _residual_norm(kind: Objective, eps: np.ndarray) -> float:
    if kind is Objective.SUM_SQUARES:
        return float(np.linalg.norm(eps))
    return _objective(kind, eps)


def _spectral_norm_sq(G: np.ndarray, iters: int = 50) -> float:
    """Largest eigenvalue of ``G^T G`` by power iteration."""
    v = np.ones(G.shape[1]) / np.sqrt(G.shape[1])
    lam = 0.0
    for _ in range(iters):
        w = G.T @ (G @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return lam


def _start(m: int, constraint: Constraint) -> np.ndarray:
    if constraint is Constraint.ROW_STOCHASTIC:
        return vec(np.full((m, m), 1.0 / m))
    return vec(np.eye(m) / m) if constraint is Constraint.INF_NORM_BALL else vec(np.eye(m))


def solve(problem: IdentificationProblem, max_iter: int = 200_000, tol: float = 1e-9,
          subgradient_iter: int = 20_000) -> IdentificationResult:
    G, b = assemble_regressors(problem)
    m = problem.m
    cons = problem.constraint
    sv = np.linalg.svd(G, compute_uv=False)
    rank = int(np.sum(sv > sv[0] * max(G.shape) * np.finfo(float).eps)) if sv.size else 0
    cond = float(sv[0] / sv[-1]) if sv.size and sv[-1] > 0 else float("inf")
    L = _spectral_norm_sq(G)
    t0 = 1.0 / L if L > 0 else 1.0

    if problem.objective is Objective.SUM_SQUARES:
        c, it, gnorm, converged, history = _projected_gradient(G, b, m, cons, t0, max_iter, tol)
        approximate = False
    else:
        c, it, gnorm, converged, history = _projected_subgradient(
            G, b, m, cons, problem.objective, t0, subgradient_iter
        )
        approximate = True

    c = project(c, cons, m)
    eps = b - G @ c
    C = unvec(c, m)
    LW = problem.lam[:, None] * problem.W
    diagnostics = {
        "rho_C": spectral_radius(C),
        "stable": bool(spectral_radius(LW) * spectral_radius(C) < 1),
        "objective_history_tail": history[-5:],
        "singular_values": sv.tolist(),
    }
    return IdentificationResult(
        C=C,
        residual=_residual_norm(problem.objective, eps),
        objective_value=_objective(problem.objective, eps),
        iterations=it,
        grad_norm=gnorm,
        converged=converged,
        condition=cond,
        rank=rank,
        approximate=approximate,
        diagnostics=diagnostics,
    )


def _projected_gradient(G, b, m, cons, t0, max_iter, tol):
    """Projected gradient with halving backtracking on ``|b - Gc|^2 / 2``.

    The halved objective has gradient Lipschitz constant ``|G|^2``, so the
    initial step ``1 / |G|^2`` already satisfies the descent lemma.  The change
    ``f(c + d) - f(c) = |Gd|^2 / 2 - r.Gd`` is evaluated directly; changes
    below the rounding floor of ``grad . d`` count as non-increasing, since
    the projected step is only feasible up to rounding.  The stopping test uses
    the gradient mapping ``|c - c_new| / t`` of the accepted step, reported for
    the unhalved objective.
    """
    eps = np.finfo(float).eps
    c = project(_start(m, cons), cons, m)
    r = b - G @ c
    f = 0.5 * float(r @ r)
    history = [2 * f]
    gnorm = np.inf
    for it in range(1, max_iter + 1):
        grad = -(G.T @ r)
        noise = 16 * eps * float(np.abs(grad) @ (np.abs(c) + 1.0))
        t = t0
        while True:
            c_new = project(c - t * grad, cons, m)
            d = c_new - c
            Gd = G @ d
            slope = -float(r @ Gd)
            delta = 0.5 * float(Gd @ Gd) + slope
            if delta <= ARMIJO * slope + noise or t < 1e-30:
                break
            t *= 0.5
        gnorm = 2.0 * float(np.linalg.norm(d)) / t
        if gnorm < tol or delta > noise:
            # delta > noise only when backtracking bottomed out
            return c, it - 1, gnorm, gnorm < tol, history
        c, r = c_new, b - G @ c_new
        f = min(f + delta, f)
        history.append(2 * f)
    return c, max_iter, gnorm, False, history


def _projected_subgradient(G, b, m, cons, kind, t0, max_iter):
    """Projected subgradient with steps ``t0 / sqrt(k)``, keeping the best iterate."""
    c = project(_start(m, cons), cons, m)
    scale = np.sqrt(t0)
    best_c, best_f = c.copy(), _objective(kind, b - G @ c)
    history = [best_f]
    g = np.zeros_like(c)
    for k in range(1, max_iter + 1):
        eps = b - G @ c
        if kind is Objective.SUM_ABS:
            g = -(G.T @ np.sign(eps))
        else:
            i = int(np.argmax(np.abs(eps)))
            g = -np.sign(eps[i]) * G[i]
        gn = np.linalg.norm(g)
        if gn == 0:
            return c, k - 1, 0.0, True, history
        c = project(c - (scale / np.sqrt(k)) * g / gn, cons, m)
        f = _objective(kind, b - G @ c)
        if f < best_f:
            best_c, best_f = c.copy(), f
            history.append(f)
    return best_c, max_iter, float(np.linalg.norm(g)), False, history
