"""Spectral radii, regularity of stochastic matrices, and limits of matrix powers."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import NamedTuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .graph import AgentClassification, maximal_stochastic_subset
from .model import TOL_ROW, NetworkModel

TOL_SPEC = 1e-10
MAX_DIM = 64


class NoConvergence(ArithmeticError):
    pass


class NotRegular(ValueError):
    pass


class NotStochastic(ValueError):
    pass


def eigenvalues(A) -> np.ndarray:
    """All eigenvalues of a real square matrix, with multiplicity.

    LAPACK ``geev`` (balancing, Hessenberg reduction, shifted QR).
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {A.shape[0]} exceeds the desk-scale cap of {MAX_DIM}")
    if A.size == 0:
        return np.zeros(0, dtype=complex)
    try:
        return np.linalg.eigvals(A).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc


def is_row_stochastic(A, tol: float = TOL_ROW) -> bool:
    A = np.asarray(A, dtype=float)
    return bool(
        A.ndim == 2
        and A.shape[0] == A.shape[1]
        and np.all(A >= 0)
        and np.all(np.abs(A.sum(axis=1) - 1.0) <= tol)
    )


def spectral_radius(A) -> float:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0.0
    if is_row_stochastic(A):
        return 1.0
    return float(np.max(np.abs(eigenvalues(A))))


class Regularity(NamedTuple):
    regular: bool
    fully_regular: bool


def _class_period(adj: csr_matrix, members: np.ndarray) -> int:
    """Period of a strongly connected class: gcd of level differences over its arcs."""
    inside = np.zeros(adj.shape[0], dtype=bool)
    inside[members] = True
    level = {int(members[0]): 0}
    queue = [int(members[0])]
    g = 0
    while queue:
        nxt = []
        for i in queue:
            for j in adj.indices[adj.indptr[i]:adj.indptr[i + 1]]:
                j = int(j)
                if not inside[j]:
                    continue
                if j in level:
                    g = gcd(g, abs(level[i] + 1 - level[j]))
                else:
                    level[j] = level[i] + 1
                    nxt.append(j)
        queue = nxt
    return g


def closed_classes(A) -> list[np.ndarray]:
    """Recurrent classes of the chain with transition matrix ``A``."""
    adj = csr_matrix(np.asarray(A) > 0)
    ncomp, labels = connected_components(adj, directed=True, connection="strong")
    leaving = np.zeros(ncomp, dtype=bool)
    rows, cols = adj.nonzero()
    leaving[labels[rows[labels[rows] != labels[cols]]]] = True
    return [np.flatnonzero(labels == c) for c in range(ncomp) if not leaving[c]]


def is_regular(A) -> Regularity:
    """Decide whether ``A^k`` converges, for row-stochastic ``A``.

    Regular iff every closed class is aperiodic; fully regular iff in addition
    there is exactly one closed class.
    """
    A = np.asarray(A, dtype=float)
    if not is_row_stochastic(A):
        raise NotStochastic("is_regular expects a row-stochastic matrix")
    adj = csr_matrix(A > 0)
    classes = closed_classes(A)
    regular = all(_class_period(adj, c) == 1 for c in classes)
    return Regularity(regular, regular and len(classes) == 1)


def is_regular_general(A, tol: float = 1e-9) -> bool:
    """Regularity of an arbitrary square matrix.

    Falls back to :func:`is_regular` for stochastic input.  Otherwise the limit
    of powers exists iff every eigenvalue is inside the unit disc or equal to 1,
    with 1 semisimple.
    """
    A = np.asarray(A, dtype=float)
    if is_row_stochastic(A):
        return is_regular(A).regular
    ev = eigenvalues(A)
    mod = np.abs(ev)
    if np.all(mod < 1 - tol):
        return True
    on_circle = mod >= 1 - tol
    if np.any(mod > 1 + tol) or np.any(np.abs(ev[on_circle] - 1.0) > tol):
        return False
    mult = int(on_circle.sum())
    rank = np.linalg.matrix_rank(A - np.eye(A.shape[0]), tol=1e-8)
    return A.shape[0] - rank == mult


def limit_power(A, mode: str = "stochastic", *, tol: float = 1e-12,
                max_squarings: int = 60) -> np.ndarray:
    """``lim A^k`` by repeated squaring.

    ``mode`` is ``"stochastic"`` (row-stochastic regular input; rows of the
    result renormalised), ``"stable"`` (spectral radius below one, result 0)
    or ``"general"`` (any regular matrix, e.g. a MiDS matrix).
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[0]
    if mode == "stable":
        if spectral_radius(A) >= 1:
            raise NotRegular("spectral radius is not below one")
        return np.zeros_like(A)
    if mode == "stochastic":
        if not is_regular(A).regular:
            raise NotRegular("a closed class of the chain is periodic")
    elif mode == "general":
        if not is_regular_general(A):
            raise NotRegular("matrix powers do not converge")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if d and spectral_radius(A) < 1 - TOL_SPEC and mode == "general":
        return np.zeros_like(A)
    P = A.copy()
    for _ in range(max_squarings):
        Q = P @ P
        if np.max(np.abs(Q - P), initial=0.0) < tol:
            P = Q
            break
        P = Q
    else:
        raise NoConvergence(f"powers did not settle after {max_squarings} squarings")
    if mode == "stochastic":
        P = np.clip(P, 0.0, None)
        P /= P.sum(axis=1, keepdims=True)
    return P


def alpha_limit(A, alpha: float) -> np.ndarray:
    """``(1 - alpha) (I - alpha A)^{-1}``, the Abel-mean approximation of the power limit."""
    A = np.asarray(A, dtype=float)
    return (1 - alpha) * np.linalg.solve(np.eye(A.shape[0]) - alpha * A, np.eye(A.shape[0]))


@dataclass
class SpectralReport:
    rho_LW: float
    rho_C: float
    stable: bool
    regular_C: bool
    regular_W22: bool | None = None
    fully_regular_W22: bool | None = None
    C_star: np.ndarray | None = None
    W22_star: np.ndarray | None = None
    A_star: np.ndarray | None = None
    verdict: str = "divergent"
    clause: str = ""
    has_oblivious: bool = field(default=False)

    @property
    def convergent(self) -> bool:
        return self.verdict in ("stable", "convergent")

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "rho_LW": self.rho_LW,
            "rho_C": self.rho_C,
            "rho_product": self.rho_LW * self.rho_C,
            "stable": self.stable,
            "regular_C": self.regular_C,
            "regular_W22": self.regular_W22,
            "fully_regular_W22": self.fully_regular_W22,
            "C_star": arr(self.C_star),
            "W22_star": arr(self.W22_star),
            "A_star": arr(self.A_star),
            "verdict": self.verdict,
            "clause": self.clause,
        }


def analyze_spectrum(model: NetworkModel, cls: AgentClassification) -> SpectralReport:
    """Stability and convergence verdict for the model.

    Stable iff ``rho(LW) rho(C) < 1``.  Otherwise, with oblivious agents
    present, convergent iff ``C`` is regular and either ``C_* = 0`` or
    ``W22`` is regular.
    """
    LW = model.LW
    oblivious = cls.oblivious
    # the oblivious block of LW is stochastic, so its spectral radius is exactly 1
    rho_LW = 1.0 if oblivious else spectral_radius(LW)
    rho_C = spectral_radius(model.C)
    stable = bool(rho_LW * rho_C < 1 - TOL_SPEC)
    regular_C = bool(is_regular_general(model.C))
    C_star = None
    if regular_C:
        C_star = limit_power(model.C, "general")

    rep = SpectralReport(rho_LW=rho_LW, rho_C=rho_C, stable=stable, regular_C=regular_C,
                         C_star=C_star, has_oblivious=bool(oblivious))

    W22_star = None
    if oblivious:
        W22 = cls.blocks(model)["W22"]
        reg = is_regular(W22)
        rep.regular_W22, rep.fully_regular_W22 = bool(reg.regular), bool(reg.fully_regular)
        if reg.regular:
            W22_star = limit_power(W22, "stochastic")
        elif C_star is not None and not np.any(C_star):
            W22_star = np.zeros_like(W22)
        rep.W22_star = W22_star

    if oblivious and rep.regular_W22:
        rep.A_star = _lw_power_limit(model, cls, W22_star)
    elif not oblivious:
        rep.A_star = np.zeros((model.n, model.n))

    if stable:
        rep.verdict = "stable"
        if not oblivious and abs(rho_C - 1.0) < 1e-9:
            rep.clause = "no oblivious agents"
        else:
            rep.clause = "rho(LW) * rho(C) < 1"
    elif not oblivious:
        rep.verdict = "divergent"
        rep.clause = "rho(LW) * rho(C) >= 1"
    elif not regular_C:
        rep.verdict = "divergent"
        rep.clause = "C not regular"
    elif np.any(C_star) and not rep.regular_W22:
        rep.verdict = "divergent"
        rep.clause = "W22 not regular"
    else:
        rep.verdict = "convergent"
        rep.clause = "C regular and C_* = 0" if not np.any(C_star) else "C regular and W22 regular"
    return rep


def _lw_power_limit(model: NetworkModel, cls: AgentClassification, W22_star) -> np.ndarray:
    """Closed-form ``lim (LW)^k`` in original agent order."""
    b = cls.blocks(model)
    a, o = cls.non_oblivious, cls.oblivious
    L11W11 = b["lam1"][:, None] * b["W11"]
    upper = np.linalg.solve(np.eye(len(a)) - L11W11, b["lam1"][:, None] * b["W12"] @ W22_star)
    A = np.zeros((model.n, model.n))
    A[np.ix_(a, o)] = upper
    A[np.ix_(o, o)] = W22_star
    return A


def check_oblivious_consistency(model: NetworkModel, cls: AgentClassification) -> bool:
    """Oblivious agents coincide with the maximal stochastic subset of ``LW``."""
    return maximal_stochastic_subset(model.LW) == cls.oblivious
