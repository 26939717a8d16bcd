"""Asynchronous gossip version of the multidimensional FJ model.

Each step samples one arc ``(i, j)`` of the interaction graph uniformly and
updates only agent ``i``::

    x_i <- (1 - g1_ij - g2_ij) x_i + g1_ij C x_j + g2_ij u_i

Sample paths keep oscillating; their running (Cesaro) averages converge to
the synchronous limit when ``Gamma1 = Lambda W`` and the rows of ``Gamma2``
sum to ``1 - lambda_ii``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .dynamics import limit_opinion
from .graph import build_graph, maximal_stochastic_subset
from .model import NetworkModel
from .spectra import is_row_stochastic

PRNG_NAME = "numpy.random.PCG64 seeded by splitmix64(seed, replication)"
TOL_CFG = 1e-9
_CHUNK = 1 << 18
_MASK64 = (1 << 64) - 1


class GossipConfigError(ValueError):
    kind = "InvalidGossipConfig"


class ObliviousAgentsPresent(GossipConfigError):
    kind = "ObliviousAgentsPresent"


class NonStochasticC(GossipConfigError):
    kind = "NonStochasticC"


class CorollaryConditionsViolated(GossipConfigError):
    kind = "CorollaryConditionsViolated"


def mix64(seed: int, r: int) -> int:
    """Sub-seed for replication ``r``: splitmix64 of ``seed + (r + 1) * golden``."""
    z = (int(seed) + (int(r) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def log_grid(steps: int, include_zero: bool = False) -> np.ndarray:
    """1-2-5 checkpoints per decade up to ``steps`` (always included)."""
    pts = {int(steps)}
    if include_zero:
        pts.add(0)
    dec = 1
    while dec <= steps:
        for f in (1, 2, 5):
            if f * dec <= steps:
                pts.add(f * dec)
        dec *= 10
    return np.array(sorted(pts), dtype=np.int64)


@dataclass(frozen=True)
class GossipConfig:
    gamma1: np.ndarray
    gamma2: np.ndarray
    seed: int = 0
    steps: int = 1_000_000
    replications: int = 1
    grid: tuple[int, ...] | None = None

    def checkpoints(self) -> np.ndarray:
        if self.grid is None:
            return log_grid(self.steps)
        g = np.unique(np.asarray(self.grid, dtype=np.int64))
        if g.size and (g[0] < 0 or g[-1] > self.steps):
            raise GossipConfigError("checkpoint grid must lie in [0, steps]")
        return g


def _check_model(model: NetworkModel) -> None:
    if not np.array_equal(model.D, np.eye(model.m)):
        raise GossipConfigError("gossip runs require D = I")
    if not is_row_stochastic(model.C):
        raise NonStochasticC("the MiDS matrix must be row-stochastic")
    if maximal_stochastic_subset(model.LW):
        raise ObliviousAgentsPresent("rho(Lambda W) = 1: the model has oblivious agents")


def validate_config(model: NetworkModel, config: GossipConfig) -> None:
    _check_model(model)
    g1 = np.asarray(config.gamma1, dtype=float)
    g2 = np.asarray(config.gamma2, dtype=float)
    n = model.n
    if g1.shape != (n, n) or g2.shape != (n, n):
        raise GossipConfigError("Gamma1 and Gamma2 must be n x n")
    if np.any(g1 < 0) or np.any(g2 < 0):
        raise GossipConfigError("gossip weights must be non-negative")
    if np.any(g1 + g2 > 1 + TOL_CFG):
        raise GossipConfigError("gamma1_ij + gamma2_ij must not exceed 1")
    off_arc = model.W <= 0
    if np.any(g2[off_arc] != 0):
        raise GossipConfigError("Gamma2 has weight outside the arc set")
    if np.any(np.abs(g2.sum(axis=1) - (1 - model.lam)) > TOL_CFG):
        raise GossipConfigError("rows of Gamma2 must sum to 1 - lambda_ii")
    target = np.where(off_arc, 0.0, model.LW)
    diff = np.abs(np.where(off_arc, 0.0, g1) - target)
    if model.m == 1 and model.C[0, 0] == 1.0:
        # with scalar C = 1 the self-loop weight gamma1_ii has no effect
        np.fill_diagonal(diff, 0.0)
    if np.any(diff > TOL_CFG):
        raise GossipConfigError("Gamma1 must equal Lambda W on the arc set")
    if config.steps < 0 or config.replications < 1:
        raise GossipConfigError("steps must be >= 0 and replications >= 1")


def default_config(model: NetworkModel, seed: int = 0, steps: int = 1_000_000,
                   replications: int = 1, grid=None) -> GossipConfig:
    """``Gamma1 = Lambda W``, ``Gamma2 = (I - Lambda) W``."""
    _check_model(model)
    cfg = GossipConfig(
        gamma1=model.LW,
        gamma2=(1.0 - model.lam)[:, None] * model.W,
        seed=int(seed),
        steps=int(steps),
        replications=int(replications),
        grid=None if grid is None else tuple(int(k) for k in grid),
    )
    validate_config(model, cfg)
    return cfg


def from_scalar_gossip(model: NetworkModel, h, gamma, seed: int = 0, steps: int = 1_000_000,
                       replications: int = 1, grid=None) -> GossipConfig:
    """Map the obstinacy/influence protocol ``(h, gamma)`` for scalar opinions.

    Requires ``(1 - h_i) d_i = 1 - lambda_ii`` with ``d_i`` the out-degree, and
    ``h_i gamma_ij = lambda_ii w_ij`` on every arc with ``i != j``.
    """
    if model.m != 1:
        raise CorollaryConditionsViolated("the scalar protocol needs m = 1")
    if model.C[0, 0] != 1.0:
        raise CorollaryConditionsViolated("the scalar protocol needs C = 1")
    h = np.asarray(h, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    n = model.n
    if h.shape != (n,) or gamma.shape != (n, n):
        raise CorollaryConditionsViolated("h must have n entries and gamma be n x n")
    if np.any((h < 0) | (h > 1)) or np.any((gamma < 0) | (gamma > 1)):
        raise CorollaryConditionsViolated("h and gamma must lie in [0, 1]")
    on_arc = model.W > 0
    d = on_arc.sum(axis=1)
    if np.any(np.abs((1 - h) * d - (1 - model.lam)) > TOL_CFG):
        i = int(np.argmax(np.abs((1 - h) * d - (1 - model.lam))))
        raise CorollaryConditionsViolated(
            f"(1 - h_{i}) d_{i} = {(1 - h[i]) * d[i]} differs from 1 - lambda_{i} = {1 - model.lam[i]}"
        )
    off_diag = on_arc & ~np.eye(n, dtype=bool)
    mismatch = np.abs(h[:, None] * gamma - model.LW) * off_diag
    if np.any(mismatch > TOL_CFG):
        raise CorollaryConditionsViolated("h_i gamma_ij must equal lambda_ii w_ij on every arc")
    g1 = np.where(on_arc, h[:, None] * gamma, 0.0)
    g2 = np.where(on_arc, (1 - h)[:, None] * np.ones((n, n)), 0.0)
    cfg = GossipConfig(g1, g2, int(seed), int(steps), int(replications),
                       None if grid is None else tuple(int(k) for k in grid))
    validate_config(model, cfg)
    return cfg


@njit(cache=True, nogil=True)
def _advance(X, S, comp, U, C, src, dst, g1, g2, picks, k0, grid, gpos, grid_sums,
             x_ref, tail_start, tail_max):
    n, m = X.shape
    tmp = np.empty(m)
    for t in range(picks.shape[0]):
        a = picks[t]
        i = src[a]
        j = dst[a]
        w1 = g1[a]
        w2 = g2[a]
        keep = 1.0 - w1 - w2
        for p in range(m):
            acc = 0.0
            for q in range(m):
                acc += C[p, q] * X[j, q]
            tmp[p] = keep * X[i, p] + w1 * acc + w2 * U[i, p]
        for p in range(m):
            X[i, p] = tmp[p]
        k = k0 + t + 1
        for r in range(n):
            for p in range(m):
                y = X[r, p] - comp[r, p]
                s = S[r, p] + y
                comp[r, p] = (s - S[r, p]) - y
                S[r, p] = s
        if k >= tail_start:
            dev = 0.0
            for r in range(n):
                for p in range(m):
                    e = abs(X[r, p] - x_ref[r, p])
                    if e > dev:
                        dev = e
            if dev > tail_max[0]:
                tail_max[0] = dev
        while gpos < grid.shape[0] and grid[gpos] == k:
            grid_sums[gpos] = S
            gpos += 1
    return gpos


@dataclass
class GossipRunStats:
    grid: np.ndarray            # checkpoint step indices k
    checkpoint_sums: np.ndarray  # (R, G, nm): sum_{l<=k} x(l)
    final: np.ndarray           # (R, nm): x(K)
    x_ref: np.ndarray           # deterministic limit
    seeds: list[int]
    tail_max_dev: np.ndarray    # (R,): max_k |x(k) - x_ref|_inf over the tail window
    tail_window: int
    steps: int
    prng: str = PRNG_NAME
    master_seed: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def cesaro_grid(self) -> np.ndarray:
        """Cesaro averages at each checkpoint, shape (R, G, nm)."""
        return self.checkpoint_sums / (self.grid[None, :, None] + 1.0)

    @property
    def cesaro(self) -> np.ndarray:
        return self.cesaro_grid[:, -1, :]

    @property
    def dist2(self) -> np.ndarray:
        return np.linalg.norm(self.cesaro_grid - self.x_ref, axis=2)

    @property
    def distinf(self) -> np.ndarray:
        return np.max(np.abs(self.cesaro_grid - self.x_ref), axis=2)

    def median_distance(self, norm: str = "inf") -> np.ndarray:
        d = self.distinf if norm == "inf" else self.dist2
        return np.median(d, axis=0)


def _run_one(model: NetworkModel, src, dst, g1, g2, grid, steps, sub_seed, x_ref, tail_start):
    n, m = model.n, model.m
    rng = np.random.Generator(np.random.PCG64(sub_seed))
    X = model.U.copy()
    S = X.copy()
    comp = np.zeros_like(X)
    grid_sums = np.zeros((grid.size, n, m))
    gpos = 0
    while gpos < grid.size and grid[gpos] == 0:
        grid_sums[gpos] = S
        gpos += 1
    tail_max = np.zeros(1)
    if tail_start == 0:
        tail_max[0] = np.max(np.abs(X - x_ref))
    C = np.ascontiguousarray(model.C)
    U = np.ascontiguousarray(model.U)
    done = 0
    n_arcs = src.size
    while done < steps:
        size = min(_CHUNK, steps - done)
        picks = rng.integers(0, n_arcs, size=size, dtype=np.int64)
        gpos = _advance(X, S, comp, U, C, src, dst, g1, g2, picks, done, grid, gpos,
                        grid_sums, x_ref, tail_start, tail_max)
        done += size
    return grid_sums.reshape(grid.size, n * m), X.ravel().copy(), float(tail_max[0])


def run(model: NetworkModel, config: GossipConfig, tail_window: int = 10_000,
        workers: int = 1, check: bool = True) -> GossipRunStats:
    """Simulate ``config.replications`` independent gossip runs from ``x(0) = u``.

    Replication ``r`` draws arcs from its own generator seeded with
    ``mix64(config.seed, r)``, so results do not depend on ``workers``.
    """
    if check:
        validate_config(model, config)
    graph = build_graph(model)
    src, dst = graph.arc_arrays()
    g1 = np.asarray(config.gamma1, dtype=float)[src, dst].copy()
    g2 = np.asarray(config.gamma2, dtype=float)[src, dst].copy()
    grid = config.checkpoints()
    x_ref = limit_opinion(model)
    X_ref = x_ref.reshape(model.n, model.m)
    tail_start = max(config.steps - tail_window + 1, 0)
    seeds = [mix64(config.seed, r) for r in range(config.replications)]

    def job(s):
        return _run_one(model, src, dst, g1, g2, grid, config.steps, s, X_ref, tail_start)

    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, seeds))
    else:
        results = [job(s) for s in seeds]

    return GossipRunStats(
        grid=grid,
        checkpoint_sums=np.array([r[0] for r in results]),
        final=np.array([r[1] for r in results]),
        x_ref=x_ref,
        seeds=seeds,
        tail_max_dev=np.array([r[2] for r in results]),
        tail_window=min(tail_window, config.steps + 1),
        steps=config.steps,
        master_seed=config.seed,
        meta={"num_arcs": graph.num_arcs},
    )


def expected_step_matrices(model: NetworkModel, config: GossipConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mean one-step map ``E x(k+1) = EP E x(k) + Ev``.

    With the default weights ``EP = I - (I - LW kron C)/|E|`` and
    ``Ev = ((I - Lambda) kron I) u / |E|``.
    """
    graph = build_graph(model)
    alpha = 1.0 / graph.num_arcs
    on_arc = model.W > 0
    g1 = np.where(on_arc, config.gamma1, 0.0)
    g2 = np.where(on_arc, config.gamma2, 0.0)
    n, m = model.n, model.m
    out = (g1 + g2).sum(axis=1)
    EP = np.eye(n * m) - alpha * np.kron(np.diag(out), np.eye(m)) + alpha * np.kron(g1, model.C)
    Ev = alpha * (g2.sum(axis=1)[:, None] * model.U).ravel()
    return EP, Ev
