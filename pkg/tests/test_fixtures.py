import json

import numpy as np

from fjmids import fixtures
from fjmids.dynamics import limit_opinion
from fjmids.graph import AgentStatus, classify_agents
from fjmids.spectra import analyze_spectrum


def test_bundled_files_are_reproducible():
    for name, doc in fixtures.build_all().items():
        on_disk = json.loads(fixtures.bundled_path(name).read_text(encoding="utf-8"))
        assert on_disk == json.loads(json.dumps(doc)), name


def test_bundled_models_load():
    for name in ("independent.json", "positive.json", "negative.json", "hierarchy51.json"):
        model = fixtures.load_bundled(name)
        assert model.m == 2


def test_hierarchy_topology():
    model = fixtures.hierarchy()
    W = model.W
    assert model.n == 51
    assert W[0, 0] == 1.0 and model.lam[0] == 0.0
    np.testing.assert_array_equal(model.u[:2], [100.0, -100.0])
    assert np.all(np.abs(model.u[2:]) <= 10)
    leaders = [1 + 5 * g for g in range(10)]
    assert W[1, 1] == 0.1 and W[1, 0] == 0.9
    for g in range(1, 10):
        i = leaders[g]
        assert W[i, i] == 0.5 and W[i, leaders[g - 1]] == 0.5
        assert np.count_nonzero(W[i]) == 2
    for g, lead in enumerate(leaders):
        for i in range(lead + 1, lead + 5):
            assert set(np.flatnonzero(W[i])) == set(range(lead, lead + 5))
    cls = classify_agents(model)
    assert cls.status[0] is AgentStatus.TOTALLY_STUBBORN and not cls.oblivious
    assert analyze_spectrum(model, cls).stable


def test_first_local_leader_is_closest_to_the_leader():
    model = fixtures.hierarchy()
    X = limit_opinion(model).reshape(51, 2)
    dist = np.abs(X[1:] - X[0]).max(axis=1)
    assert np.argmin(dist) == 0
    np.testing.assert_array_equal(X[0], [100.0, -100.0])


def test_hierarchy_is_seeded():
    assert fixtures.hierarchy() == fixtures.hierarchy()
    assert fixtures.hierarchy(seed=1) != fixtures.hierarchy()
