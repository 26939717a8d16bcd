"""Synchronous multidimensional FJ dynamics and closed-form limits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import AgentClassification, classify_agents
from .model import NetworkModel, OpinionState
from .spectra import SpectralReport, analyze_spectrum

DIVERGENCE_BOUND = 1e12


class NotConvergent(ValueError):
    pass


class SingularSystem(ArithmeticError):
    pass


@dataclass
class Trajectory:
    states: list[OpinionState]
    reason: str  # "converged" | "step-cap" | "diverged"

    @property
    def X(self) -> np.ndarray:
        """States stacked as a ``(K+1) x nm`` array."""
        return np.array([s.x for s in self.states])

    @property
    def final(self) -> np.ndarray:
        return self.states[-1].x


def step(model: NetworkModel, x: np.ndarray) -> np.ndarray:
    """One synchronous update, computed agent-wise without the Kronecker matrix."""
    X = np.asarray(x, dtype=float).reshape(model.n, model.m)
    Y = (model.W @ X) @ model.C.T
    return (model.lam[:, None] * Y + (1.0 - model.lam)[:, None] * model.U).ravel()


def simulate(model: NetworkModel, max_steps: int = 100_000, conv_tol: float = 1e-10) -> Trajectory:
    if conv_tol <= 0:
        raise ValueError("conv_tol must be positive")
    x = model.x0()
    states = [OpinionState(0, x)]
    reason = "step-cap"
    for k in range(1, max_steps + 1):
        nxt = step(model, x)
        states.append(OpinionState(k, nxt))
        if not np.all(np.isfinite(nxt)) or np.max(np.abs(nxt)) > DIVERGENCE_BOUND:
            reason = "diverged"
            break
        if np.max(np.abs(nxt - x)) < conv_tol:
            reason = "converged"
            break
        x = nxt
    return Trajectory(states, reason)


def _solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc


def _context(model, cls, spec):
    cls = cls or classify_agents(model)
    spec = spec or analyze_spectrum(model, cls)
    return cls, spec


def limit_opinion(model: NetworkModel, cls: AgentClassification | None = None,
                  spec: SpectralReport | None = None) -> np.ndarray:
    """Limit of the synchronous dynamics from ``x(0) = (I kron D) u``.

    Stable models solve ``(I - LW kron C) x = ((I - Lambda) kron I) u``.  With
    oblivious agents the block formula is used: the oblivious part tends to
    ``(W22_* kron C_* D) u2`` and feeds the rest through
    ``(lam1 W12 W22_*) kron (C C_* D)``.
    """
    cls, spec = _context(model, cls, spec)
    n, m = model.n, model.m
    if spec.stable:
        A = np.eye(n * m) - np.kron(model.LW, model.C)
        return _solve(A, ((1.0 - model.lam)[:, None] * model.U).ravel())
    if not spec.convergent:
        raise NotConvergent(f"model is not convergent ({spec.clause})")

    blocks = cls.blocks(model)
    a, o = cls.non_oblivious, cls.oblivious
    U = model.U
    CsD = spec.C_star @ model.D
    # oblivious agents: X2 -> W22_* U2 (C_* D)^T
    X2 = spec.W22_star @ U[o] @ CsD.T
    X = np.zeros((n, m))
    X[o] = X2
    if a:
        lam1 = blocks["lam1"]
        rhs = (1.0 - lam1)[:, None] * U[a] + (
            (lam1[:, None] * blocks["W12"]) @ spec.W22_star @ U[o] @ (model.C @ CsD).T
        )
        A = np.eye(len(a) * m) - np.kron(lam1[:, None] * blocks["W11"], model.C)
        X[a] = _solve(A, rhs.ravel()).reshape(len(a), m)
    return X.ravel()


def alpha_approximation(model: NetworkModel, alpha: float) -> np.ndarray:
    """Limit of the surrogate where every susceptibility is scaled by ``alpha``.

    Only defined for independent issues (``C = I``).
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    if not np.array_equal(model.C, np.eye(model.m)):
        raise ValueError("alpha approximation needs C = I")
    n = model.n
    rhs = (1.0 - alpha * model.lam)[:, None] * model.U
    X = _solve(np.eye(n) - alpha * model.LW, rhs)
    return X.ravel()


def stationary_series(model: NetworkModel, cls: AgentClassification | None = None,
                      spec: SpectralReport | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(sum_k (LW)^k (I - Lambda) u, A_* u)`` for a scalar model.

    For a convergent model the two parts add up to the limit opinion.
    """
    if model.m != 1:
        raise ValueError("stationary_series is defined for scalar opinions (m = 1)")
    cls, spec = _context(model, cls, spec)
    if spec.A_star is None:
        from .spectra import NotRegular

        raise NotRegular("LW is not regular")
    u = model.u
    a = cls.non_oblivious
    series = np.zeros(model.n)
    if a:
        b = cls.blocks(model)
        lam1 = b["lam1"]
        series[a] = _solve(np.eye(len(a)) - lam1[:, None] * b["W11"], (1.0 - lam1) * u[a])
    return series, spec.A_star @ u
