"""Interaction graph, agent classification and the oblivious-block decomposition."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass

import numpy as np

from .model import TOL_ROW, NetworkModel


class NotSubstochastic(ValueError):
    pass


@dataclass(frozen=True)
class InteractionGraph:
    """Directed graph with an arc ``(i, j)`` for every positive ``w_ij``.

    Arcs are 0-based and sorted lexicographically.
    """

    n: int
    arcs: tuple[tuple[int, int], ...]

    @property
    def num_arcs(self) -> int:
        return len(self.arcs)

    def successors(self, i: int) -> list[int]:
        return [j for (a, j) in self.arcs if a == i]

    def out_degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, _ in self.arcs:
            deg[i] += 1
        return deg

    def arc_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.arcs:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        a = np.array(self.arcs, dtype=np.int64)
        return a[:, 0].copy(), a[:, 1].copy()


def build_graph(model: NetworkModel | np.ndarray) -> InteractionGraph:
    W = model.W if isinstance(model, NetworkModel) else np.asarray(model)
    ii, jj = np.nonzero(W > 0)  # row-major order is already lexicographic
    return InteractionGraph(n=W.shape[0], arcs=tuple(zip(ii.tolist(), jj.tolist())))


class AgentStatus(str, enum.Enum):
    TOTALLY_STUBBORN = "totally_stubborn"
    STUBBORN = "stubborn"
    INFLUENCED_BY_STUBBORN = "influenced_by_stubborn"
    OBLIVIOUS = "oblivious"


@dataclass(frozen=True)
class AgentClassification:
    status: tuple[AgentStatus, ...]
    perm: np.ndarray  # perm[p] = original index placed at position p
    n_prime: int

    @property
    def n(self) -> int:
        return len(self.status)

    @property
    def oblivious(self) -> list[int]:
        return [i for i, s in enumerate(self.status) if s is AgentStatus.OBLIVIOUS]

    @property
    def non_oblivious(self) -> list[int]:
        return [i for i, s in enumerate(self.status) if s is not AgentStatus.OBLIVIOUS]

    def blocks(self, model: NetworkModel) -> dict[str, np.ndarray]:
        """Blocks ``W11, W12, W22, lam1`` of the permuted model."""
        a, b = self.non_oblivious, self.oblivious
        W = model.W
        return {
            "W11": W[np.ix_(a, a)],
            "W12": W[np.ix_(a, b)],
            "W21": W[np.ix_(b, a)],
            "W22": W[np.ix_(b, b)],
            "lam1": model.lam[a],
        }

    def to_dict(self) -> dict:
        return {
            "status": [s.value for s in self.status],
            "n_prime": self.n_prime,
            "permutation": self.perm.tolist(),
            "block_sizes": [self.n_prime, self.n - self.n_prime],
        }


def classify_agents(model: NetworkModel, graph: InteractionGraph | None = None) -> AgentClassification:
    """Label every agent and order non-oblivious agents first.

    Stubborn means ``lambda_ii < 1``.  An agent with a walk in the interaction
    graph to a stubborn agent is influenced; anything else is oblivious.
    """
    graph = graph or build_graph(model)
    n = model.n
    preds: list[list[int]] = [[] for _ in range(n)]
    for i, j in graph.arcs:
        preds[j].append(i)

    stubborn = [i for i in range(n) if model.lam[i] < 1.0]
    reached = np.zeros(n, dtype=bool)
    reached[stubborn] = True
    queue = deque(stubborn)
    while queue:
        j = queue.popleft()
        for i in preds[j]:
            if not reached[i]:
                reached[i] = True
                queue.append(i)

    status = []
    for i in range(n):
        if model.lam[i] == 0.0:
            status.append(AgentStatus.TOTALLY_STUBBORN)
        elif model.lam[i] < 1.0:
            status.append(AgentStatus.STUBBORN)
        elif reached[i]:
            status.append(AgentStatus.INFLUENCED_BY_STUBBORN)
        else:
            status.append(AgentStatus.OBLIVIOUS)
    front = [i for i in range(n) if reached[i]]
    back = [i for i in range(n) if not reached[i]]
    return AgentClassification(
        status=tuple(status), perm=np.array(front + back, dtype=int), n_prime=len(front)
    )


def maximal_stochastic_subset(A, tol: float = TOL_ROW) -> list[int]:
    """Largest index set whose principal submatrix of ``A`` is row-stochastic.

    ``A`` must be non-negative and substochastic.  Rows lacking mass are
    removed, then rows leaking mass into removed columns, until nothing
    changes.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSubstochastic(f"expected a square matrix, got shape {A.shape}")
    if np.any(A < 0) or np.any(A.sum(axis=1) > 1 + tol):
        raise NotSubstochastic("matrix has negative entries or a row sum above 1")
    alive = A.sum(axis=1) >= 1 - tol
    while True:
        keep = alive & (A[:, alive].sum(axis=1) >= 1 - tol)
        if np.array_equal(keep, alive):
            break
        alive = keep
    return np.flatnonzero(alive).tolist()
