"""Bell's local model: sign observables on an isotropic spin axis.

A complete state is a spin axis on the unit sphere.  Station 1 reports the
sign of the axis along its detector direction; station 2 sees the opposite
angular momentum and reports the negated value.  When the axis is exactly
perpendicular to the detector the outcome is the sign of the first nonzero
detector component, taken in the order x, y, z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from macrobell.clifford import UnitVector
from macrobell.errors import DomainError
from macrobell.rng import SeededStream, to_unit_interval

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CompleteState:
    """Spin axis ``lambda = J1 = -J2`` of one trial."""

    direction: UnitVector

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.direction, dtype=dtype)


def tie_break_sign(n) -> int:
    """Sign of the first nonzero component of ``n``."""
    for c in np.asarray(n, dtype=float).reshape(3):
        if c != 0.0:
            return 1 if c > 0.0 else -1
    raise DomainError("zero detector direction has no tie-break sign")


def sign_matrix(directions, normals, tie_eps: float = 0.0) -> np.ndarray:
    """Outcomes ``A_{n_k}(lambda_j)`` for every axis/detector pair, shape (N, K), int8.

    The projection is written out component by component so that every entry
    rounds the same way whichever batch it is computed in.
    """
    d = np.asarray(directions, dtype=float).reshape(-1, 3)
    n = np.asarray(normals, dtype=float).reshape(-1, 3)
    proj = d[:, 0:1] * n[:, 0] + d[:, 1:2] * n[:, 1] + d[:, 2:3] * n[:, 2]
    pos = proj > tie_eps
    neg = proj < -tie_eps
    out = pos.view(np.int8) - neg.view(np.int8)
    ties = ~(pos | neg)
    if ties.any():
        tie = np.array([tie_break_sign(row) for row in n], dtype=np.int8)
        out[ties] = np.broadcast_to(tie, out.shape)[ties]
    return out


def outcomes(n, directions, tie_eps: float = 0.0) -> np.ndarray:
    """Station-1 outcomes ``A_n(lambda_j)`` for a (N, 3) array of axes, as int8."""
    return sign_matrix(directions, np.asarray(n, dtype=float).reshape(1, 3), tie_eps)[:, 0]


def observable_A(n, state, tie_eps: float = 0.0) -> int:
    n = np.asarray(n, dtype=float).reshape(3)
    lam = np.asarray(state, dtype=float).reshape(3)
    return int(outcomes(n, lam[None, :], tie_eps)[0])


def observable_B(n, state, tie_eps: float = 0.0) -> int:
    """Station-2 outcome, the exact negation of :func:`observable_A` (ties included)."""
    return -observable_A(n, state, tie_eps)


def _gaussian_triples(words: np.ndarray) -> np.ndarray:
    u = to_unit_interval(words)
    r1 = np.sqrt(-2.0 * np.log(u[:, 0]))
    r2 = np.sqrt(-2.0 * np.log(u[:, 2]))
    t1 = _TWO_PI * u[:, 1]
    t2 = _TWO_PI * u[:, 3]
    return np.stack([r1 * np.cos(t1), r1 * np.sin(t1), r2 * np.cos(t2)], axis=1)


def _norms(v: np.ndarray) -> np.ndarray:
    return np.sqrt(v[:, 0] * v[:, 0] + v[:, 1] * v[:, 1] + v[:, 2] * v[:, 2])


def isotropic_directions(stream: SeededStream, start: int, count: int) -> np.ndarray:
    """Uniform axes for trials ``start .. start+count-1`` of ``stream``, shape (count, 3).

    Each trial normalizes three standard normals built from its own word
    block; an all-zero triple is redrawn from the trial's next attempt.
    """
    v = _gaussian_triples(stream.block(start, count))
    norms = _norms(v)
    for row in np.flatnonzero(norms == 0.0):
        attempt = 1
        while norms[row] == 0.0:
            v[row] = _gaussian_triples(stream.trial(start + int(row), attempt)[None, :])[0]
            norms[row] = _norms(v[row : row + 1])[0]
            attempt += 1
    return v / norms[:, None]


def sample_isotropic(stream: SeededStream) -> CompleteState:
    start = stream.position
    stream.position += 1
    return CompleteState(UnitVector.from_array(isotropic_directions(stream, start, 1)[0]))


def analytic_correlation_linear(a, b) -> float:
    """-1 + (2/pi) arccos(a.b)."""
    d = float(np.dot(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))
    d = min(1.0, max(-1.0, d))
    return -1.0 + 2.0 * math.acos(d) / math.pi


def as_directions(ensemble) -> np.ndarray:
    """Coerce an ensemble (array, EnsembleRecord, or iterable of states) to (N, 3)."""
    if hasattr(ensemble, "directions"):
        return np.asarray(ensemble.directions, dtype=float)
    if isinstance(ensemble, np.ndarray):
        return ensemble.reshape(-1, 3).astype(float, copy=False)
    items: Iterable = ensemble
    rows = [np.asarray(s, dtype=float).reshape(3) for s in items]
    return np.array(rows, dtype=float).reshape(-1, 3)


def marginal_mean(ensemble, n, tie_eps: float = 0.0) -> float:
    directions = as_directions(ensemble)
    if len(directions) == 0:
        raise DomainError("marginal_mean needs a nonempty ensemble")
    total = int(outcomes(n, directions, tie_eps).sum(dtype=np.int64))
    return total / len(directions)
