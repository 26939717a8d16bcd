"""Bundled example models and the generated 51-agent hierarchy.

The four-agent network below is the classic Friedkin-Johnsen small-group
influence matrix.  Every bundled JSON file under ``data/`` is reproducible
with :func:`build_all`.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .model import NetworkModel, model_from_dict, validate_model

W4 = np.array([
    [0.220, 0.120, 0.360, 0.300],
    [0.147, 0.215, 0.344, 0.294],
    [0.0, 0.0, 1.0, 0.0],
    [0.090, 0.178, 0.446, 0.286],
])
U4 = np.array([25, 25, 25, 15, 75, -50, 85, 5], dtype=float)
C_I2 = np.eye(2)
C_POS = np.array([[0.8, 0.2], [0.3, 0.7]])
C_NEG = np.array([[0.8, -0.2], [-0.3, 0.7]])
C_HIER = np.array([[0.9, 0.1], [0.1, 0.9]])

# Printed (rounded) values used as reference targets.
REFERENCE = {
    "independent": [60, -19.3, 60, -21.5, 75, -50, 75, -23.2],
    "positive": [39.2, 12, 39, 10.1, 75, -50, 56, 5.3],
    "negative": [52.3, -30.9, 52.1, -33.3, 75, -50, 68.4, -33.2],
    "degroot_independent": [75, -50] * 4,
    "degroot_positive": [25, 25] * 4,
    "degroot_negative": [65, -65] * 4,
    "steady_state_observed": [35, 11, 35, 10, 75, -50, 53, 5],
    "steady_state_C": [[0.7562, 0.2438], [0.3032, 0.6968]],
    "steady_state_residual": 0.9322,
    "steady_state_refit": [35.316, 11.443, 35.092, 9.483, 75, -50, 52.386, 4.915],
    "trajectory_observed": [
        [42.80, 14.05, 43.59, 12.51, 75, -50, 61.49, 7.18],
        [41.31, 13.37, 41.45, 11.43, 75, -50, 55.48, 6.45],
        [41.74, 12.30, 40.41, 10.84, 75, -50, 58.99, 6.02],
    ],
    "trajectory_C": [[0.8181, 0.1819], [0.2983, 0.7017]],
    "trajectory_refit": [
        [43.12, 14.66, 42.54, 12.37, 75, -50, 59.90, 7.17],
        [41.93, 13.26, 41.73, 11.35, 75, -50, 58.37, 6.26],
        [41.30, 12.69, 41.12, 10.79, 75, -50, 57.90, 5.83],
    ],
}


def four_agent(C=C_I2, susceptibility: str = "coupled") -> NetworkModel:
    """The four-agent network with ``Lambda = I - diag W`` or ``Lambda = I``."""
    lam = 1.0 - np.diag(W4) if susceptibility == "coupled" else np.ones(4)
    return validate_model(W4, lam, C, U4)


def hierarchy(groups: int = 10, group_size: int = 5, seed: int = 2017,
              first_self: float = 0.1, other_self: float = 0.5) -> NetworkModel:
    """A totally stubborn leader followed by a chain of groups.

    Agent 0 is the leader.  Group ``g`` occupies indices ``1 + g*group_size``
    onward; its first member is the local leader, listening only to itself and
    to the previous local leader (the global leader for ``g = 0``).  The
    remaining members listen to their local leader, to each other and to
    themselves with random positive weights.
    """
    rng = np.random.default_rng(seed)
    n = 1 + groups * group_size
    W = np.zeros((n, n))
    W[0, 0] = 1.0
    prev = 0
    for g in range(groups):
        base = 1 + g * group_size
        members = list(range(base, base + group_size))
        s = first_self if g == 0 else other_self
        W[base, base] = s
        W[base, prev] = 1.0 - s
        for i in members[1:]:
            w = rng.uniform(0.1, 1.0, size=group_size)
            W[i, members] = w / w.sum()
        prev = base
    W /= W.sum(axis=1, keepdims=True)
    lam = 1.0 - np.diag(W)
    u = rng.uniform(-10, 10, size=(n, 2))
    u[0] = (100.0, -100.0)
    return validate_model(W, lam, C_HIER, u)


def _model_doc(model: NetworkModel, note: str) -> dict:
    doc = model.to_dict()
    doc["description"] = note
    return doc


def identification_doc(mode: str) -> dict:
    lam = 1.0 - np.diag(W4)
    doc = {
        "W": W4.tolist(),
        "Lambda": lam.tolist(),
        "m": 2,
        "u": U4.reshape(4, 2).tolist(),
        "mode": mode,
        "constraint": "stochastic",
        "objective": "squares",
    }
    if mode == "infinite":
        doc["observations"] = [REFERENCE["steady_state_observed"]]
        doc["description"] = "steady-state opinions of the four-agent network; C unknown"
    else:
        doc["observations"] = REFERENCE["trajectory_observed"]
        doc["description"] = "three rounds of four-agent opinions; C unknown"
    return doc


def build_all() -> dict[str, dict]:
    """All bundled documents keyed by file name."""
    return {
        "independent.json": _model_doc(four_agent(C_I2), "four agents, C = I (independent issues)"),
        "positive.json": _model_doc(four_agent(C_POS), "four agents, positively coupled issues"),
        "negative.json": _model_doc(four_agent(C_NEG), "four agents, negatively coupled issues"),
        "degroot_independent.json": _model_doc(four_agent(C_I2, "degroot"), "Lambda = I, C = I"),
        "degroot_positive.json": _model_doc(four_agent(C_POS, "degroot"), "Lambda = I, positive coupling"),
        "degroot_negative.json": _model_doc(four_agent(C_NEG, "degroot"), "Lambda = I, negative coupling"),
        "hierarchy51.json": _model_doc(hierarchy(), "leader plus 10 chained groups of 5, seed 2017"),
        "identify_infinite.json": identification_doc("infinite"),
        "identify_finite.json": identification_doc("finite"),
    }


def write_all(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, doc in build_all().items():
        path = directory / name
        path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("fjmids") / "data" / name))


def load_bundled(name: str) -> NetworkModel:
    with open(bundled_path(name), encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
