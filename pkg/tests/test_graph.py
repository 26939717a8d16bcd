from itertools import combinations

import numpy as np
import pytest

from fjmids import fixtures
from fjmids.graph import (
    AgentStatus,
    NotSubstochastic,
    build_graph,
    classify_agents,
    maximal_stochastic_subset,
)
from fjmids.model import normalize_model, validate_model

from conftest import random_model

S = AgentStatus


def test_example_graph_arcs(fj4):
    g = build_graph(fj4)
    assert g.out_degree().tolist() == [4, 4, 1, 4]
    assert g.successors(2) == [2]
    assert g.num_arcs == 13
    assert list(g.arcs) == sorted(g.arcs)


def test_identity_graph():
    g = build_graph(np.eye(3))
    assert g.arcs == ((0, 0), (1, 1), (2, 2))


def test_zero_entry_drops_arc():
    W = np.full((3, 3), 1 / 3)
    W[0, 2], W[0, 1] = 0.0, 2 / 3
    g = build_graph(W)
    assert (0, 2) not in g.arcs and g.num_arcs == 8


def test_arcs_iff_positive_weight():
    rng = np.random.default_rng(3)
    for _ in range(50):
        model = random_model(rng)
        g = build_graph(model)
        assert set(g.arcs) == set(zip(*map(list, np.nonzero(model.W > 0))))
        if np.all(np.diag(model.W) > 0):
            assert g.num_arcs >= model.n


def test_example_classification(fj4):
    cls = classify_agents(fj4)
    assert cls.status == (S.STUBBORN, S.STUBBORN, S.TOTALLY_STUBBORN, S.STUBBORN)
    assert cls.oblivious == [] and cls.n_prime == 4


def test_degroot_all_oblivious():
    model = fixtures.four_agent(fixtures.C_POS, susceptibility="degroot")
    cls = classify_agents(model)
    assert all(s is S.OBLIVIOUS for s in cls.status)
    assert cls.n_prime == 0


def test_three_agent_chain():
    W = [[0.5, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    model = validate_model(W, [0.5, 1.0, 1.0], [[1.0]], [1.0, 2.0, 3.0])
    cls = classify_agents(model)
    assert cls.status == (S.STUBBORN, S.OBLIVIOUS, S.OBLIVIOUS)
    assert cls.perm.tolist() == [0, 1, 2]


def test_permutation_is_stable():
    W = [[1.0, 0, 0], [0.5, 0.5, 0], [0, 0.5, 0.5]]
    model = validate_model(W, [1.0, 1.0, 0.5], [[1.0]], [0, 0, 0])
    cls = classify_agents(model)
    assert cls.status[0] is S.OBLIVIOUS and cls.status[1] is S.OBLIVIOUS
    assert cls.perm.tolist() == [2, 0, 1]


@pytest.mark.parametrize(
    "A, expected",
    [
        ([[0.5, 0.0], [0.3, 0.7]], []),
        ([[1.0, 0.0], [0.3, 0.6]], [0]),
        ([[0.2, 0.8], [0.5, 0.5]], [0, 1]),
    ],
)
def test_maximal_stochastic_subset_small(A, expected):
    assert maximal_stochastic_subset(A) == expected


def test_example_lw_has_no_stochastic_subset(fj4):
    assert maximal_stochastic_subset(fj4.LW) == []


def test_not_substochastic():
    with pytest.raises(NotSubstochastic):
        maximal_stochastic_subset([[0.7, 0.7], [0.0, 1.0]])
    with pytest.raises(NotSubstochastic):
        maximal_stochastic_subset([[1.2, -0.2], [0.0, 1.0]])


def _stochastic_subsets(A):
    n = A.shape[0]
    out = []
    for r in range(1, n + 1):
        for J in combinations(range(n), r):
            if np.all(np.abs(A[np.ix_(J, J)].sum(axis=1) - 1) <= 1e-9):
                out.append(frozenset(J))
    return out


def test_union_of_stochastic_subsets_and_maximality():
    rng = np.random.default_rng(11)
    for _ in range(150):
        n = int(rng.integers(1, 7))
        model = random_model(rng, n=n, m=1, oblivious=int(rng.integers(0, n + 1)))
        A = model.LW
        subsets = _stochastic_subsets(A)
        for J1 in subsets:
            for J2 in subsets:
                J = sorted(J1 | J2)
                assert np.all(np.abs(A[np.ix_(J, J)].sum(axis=1) - 1) <= 1e-9)
        best = max(subsets, key=len, default=frozenset())
        assert maximal_stochastic_subset(A) == sorted(best)


def test_oblivious_set_equals_maximal_stochastic_subset():
    rng = np.random.default_rng(12)
    for trial in range(250):
        n = int(rng.integers(1, 10))
        ob = int(rng.integers(0, n + 1)) if trial % 3 else 0
        model = normalize_model(random_model(rng, n=n, m=1, oblivious=ob))
        cls = classify_agents(model)
        assert maximal_stochastic_subset(model.LW) == cls.oblivious
        assert set(cls.oblivious) >= set(range(n - ob, n)) or ob == 0


def test_permuted_lw_is_block_upper_triangular():
    rng = np.random.default_rng(13)
    for _ in range(100):
        model = random_model(rng, n=int(rng.integers(2, 9)), m=1, oblivious=int(rng.integers(0, 4)))
        cls = classify_agents(model)
        P = model.LW[np.ix_(cls.perm, cls.perm)]
        k = cls.n_prime
        assert not np.any(P[k:, :k])
        assert np.all(P[k:, k:] == model.W[np.ix_(cls.oblivious, cls.oblivious)])


def test_classification_to_dict(fj4):
    d = classify_agents(fj4).to_dict()
    assert d["status"][2] == "totally_stubborn"
    assert d["block_sizes"] == [4, 0]
