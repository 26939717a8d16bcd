"""Network model types for the multidimensional Friedkin-Johnsen dynamics.

A model is the tuple ``(W, Lambda, C, D, u)``: row-stochastic influence
weights between ``n`` agents, diagonal susceptibilities, an ``m x m``
issue-coupling (MiDS) matrix, an initial-condition transform and the stacked
prejudice vector.  Vectors of opinions are stacked agent-major, so agent
``i`` owns entries ``i*m .. i*m + m - 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

TOL_ROW = 1e-9
TOL_NEG = 1e-12


class ModelError(ValueError):
    """Base class for model validation failures."""

    kind = "ModelError"

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class NonStochasticRow(ModelError):
    kind = "NonStochasticRow"


class BadSusceptibility(ModelError):
    kind = "BadSusceptibility"


class DimensionMismatch(ModelError):
    kind = "DimensionMismatch"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """Validated model.  Construct through :func:`validate_model`.

    ``lam`` holds the diagonal of the susceptibility matrix; use
    :attr:`Lambda` for the full matrix.
    """

    W: np.ndarray
    lam: np.ndarray
    C: np.ndarray
    u: np.ndarray
    D: np.ndarray = field(default=None)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def m(self) -> int:
        return self.C.shape[0]

    @property
    def Lambda(self) -> np.ndarray:
        return np.diag(self.lam)

    @property
    def LW(self) -> np.ndarray:
        """The product Lambda @ W."""
        return self.lam[:, None] * self.W

    @property
    def U(self) -> np.ndarray:
        """Prejudices as an ``n x m`` array (row i is agent i)."""
        return self.u.reshape(self.n, self.m)

    def x0(self) -> np.ndarray:
        """Initial stacked state ``(I_n kron D) u``."""
        return (self.U @ self.D.T).ravel()

    def replace(self, **changes) -> "NetworkModel":
        fields = dict(W=self.W, lam=self.lam, C=self.C, u=self.u, D=self.D)
        fields.update(changes)
        return validate_model(**fields)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "W": self.W.tolist(),
            "Lambda": self.lam.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "u": self.U.tolist(),
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, NetworkModel):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, k), getattr(other, k))
            for k in ("W", "lam", "C", "u", "D")
        )

    __hash__ = None


@dataclass(frozen=True)
class OpinionState:
    k: int
    x: np.ndarray


def validate_model(W, lam, C, u, D=None, *, tol_row: float = TOL_ROW,
                   tol_neg: float = TOL_NEG) -> NetworkModel:
    """Check a candidate model and return it as an immutable :class:`NetworkModel`.

    ``lam`` may be the diagonal entries or a full diagonal matrix.  ``u`` may be
    stacked (length ``n*m``) or an ``n x m`` array.  Entries of ``W`` in
    ``[-tol_neg, 0)`` are clamped to zero and rows within ``tol_row`` of one
    are rescaled to sum to one.
    """
    W = np.array(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[0] == 0:
        raise DimensionMismatch(f"W must be a non-empty square matrix, got shape {W.shape}")
    n = W.shape[0]

    lam = np.array(lam, dtype=float)
    if lam.ndim == 2:
        if lam.shape != (n, n):
            raise DimensionMismatch(f"Lambda has shape {lam.shape}, expected {(n, n)}")
        if np.any(lam - np.diag(np.diag(lam)) != 0):
            raise BadSusceptibility("Lambda must be diagonal")
        lam = np.diag(lam).copy()
    if lam.shape != (n,):
        raise DimensionMismatch(f"Lambda has {lam.size} diagonal entries, expected {n}")

    C = np.array(C, dtype=float)
    if C.ndim == 0:
        C = C.reshape(1, 1)
    if C.ndim != 2 or C.shape[0] != C.shape[1] or C.shape[0] == 0:
        raise DimensionMismatch(f"C must be a non-empty square matrix, got shape {C.shape}")
    m = C.shape[0]

    D = np.eye(m) if D is None else np.array(D, dtype=float)
    if D.ndim == 0:
        D = D.reshape(1, 1)
    if D.shape != (m, m):
        raise DimensionMismatch(f"D has shape {D.shape}, expected {(m, m)}")

    u = np.array(u, dtype=float)
    if u.shape == (n, m):
        u = u.ravel()
    if u.shape != (n * m,):
        raise DimensionMismatch(f"u has shape {u.shape}, expected ({n * m},) or {(n, m)}")

    for name, arr in (("W", W), ("Lambda", lam), ("C", C), ("D", D), ("u", u)):
        if not np.all(np.isfinite(arr)):
            raise ModelError(f"{name} contains non-finite entries")

    if np.any(W < -tol_neg):
        i, j = np.argwhere(W < -tol_neg)[0]
        raise NonStochasticRow(f"W[{i},{j}] = {W[i, j]} is negative")
    W[W < 0] = 0.0
    sums = W.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol_row)
    if bad.size:
        i = bad[0]
        raise NonStochasticRow(f"row {i} of W sums to {sums[i]!r}")
    # rows already exact up to summation rounding are left alone, so re-validating is a no-op
    off = np.abs(sums - 1.0) > W.shape[1] * np.finfo(float).eps
    W[off] = W[off] / sums[off, None]

    if np.any(lam < 0) or np.any(lam > 1):
        i = np.flatnonzero((lam < 0) | (lam > 1))[0]
        raise BadSusceptibility(f"lambda_{i} = {lam[i]} outside [0, 1]")

    return NetworkModel(W=_frozen(W), lam=_frozen(lam), C=_frozen(C), u=_frozen(u), D=_frozen(D))


def normalize_model(model: NetworkModel) -> NetworkModel:
    """Rewrite agents whose opinion is pinned to the prejudice into canonical form.

    An agent with ``lambda_ii = 0`` gets the row ``e_i`` in ``W``.  An agent
    with ``w_ii = 1`` gets ``lambda_ii = 0``, but only when ``C`` and ``D``
    are identities: otherwise a self-looped agent keeps mixing its own issues
    through ``C`` and the rewrite would change the trajectory.

    Returns ``model`` itself when nothing needs rewriting.
    """
    W = model.W.copy()
    lam = model.lam.copy()
    identity_coupling = np.array_equal(model.C, np.eye(model.m)) and np.array_equal(
        model.D, np.eye(model.m)
    )
    changed = False
    for i in range(model.n):
        if identity_coupling and W[i, i] == 1.0 and lam[i] != 0.0:
            lam[i] = 0.0
            changed = True
        if lam[i] == 0.0 and W[i, i] != 1.0:
            W[i] = 0.0
            W[i, i] = 1.0
            changed = True
    if not changed:
        return model
    return model.replace(W=W, lam=lam)


def is_normalized(model: NetworkModel) -> bool:
    return normalize_model(model) is model


def model_from_dict(doc: Mapping[str, Any]) -> NetworkModel:
    """Build a model from the JSON document layout (``n, m, W, Lambda, C, D, u``)."""
    try:
        W, lam, C, u = doc["W"], doc["Lambda"], doc["C"], doc["u"]
    except KeyError as exc:
        raise DimensionMismatch(f"model document is missing field {exc.args[0]!r}") from None
    model = validate_model(W, lam, C, u, doc.get("D"))
    for key, actual in (("n", model.n), ("m", model.m)):
        if key in doc and int(doc[key]) != actual:
            raise DimensionMismatch(f"declared {key}={doc[key]} but matrices imply {actual}")
    return model


def load_model(path) -> NetworkModel:
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def save_model(model: NetworkModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=2) + "\n", encoding="utf-8")
