"""Trivector complete-state model.

The complete state of a trial is an orientation ``mu = +I`` or ``mu = -I``.
Detector beables are the bivectors ``mu n``, and the joint quantity at
settings ``(a, b)`` is the Clifford product ``(mu a)(mu b)``.  The expectation
is the equal-weight average of that product over an orientation ensemble.

Everything is computed with the kernel in :mod:`macrobell.clifford`; the
average is returned as a full multivector so callers see the scalar part and
the bivector residue separately.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from macrobell.clifford import (
    Multivector,
    Quaternion,
    bivector_product,
    dual,
    quaternion_to_array,
)
from macrobell.errors import DomainError
from macrobell.rng import ORIENTATION_DOMAIN, SeededStream


class Orientation(enum.IntEnum):
    PLUS = 1
    MINUS = -1

    @property
    def pseudoscalar(self) -> Multivector:
        return Multivector([0, 0, 0, 0, 0, 0, 0, float(self.value)])


@dataclass(frozen=True)
class OrientationEnsemble:
    """Counts of ``+I`` and ``-I`` complete states.

    ``exhaustive`` ensembles weight both orientations equally; ``sampled``
    ensembles record fair coin draws.
    """

    mode: str
    n_plus: int
    n_minus: int

    def __post_init__(self):
        if self.mode not in ("exhaustive", "sampled"):
            raise DomainError(f"unknown ensemble mode {self.mode!r}")
        if self.n_plus < 0 or self.n_minus < 0:
            raise DomainError("orientation counts must be nonnegative")
        if self.mode == "exhaustive" and self.n_plus != self.n_minus:
            raise DomainError("an exhaustive ensemble has equal counts of each orientation")

    @property
    def size(self) -> int:
        return self.n_plus + self.n_minus

    @classmethod
    def exhaustive(cls, pairs: int = 1) -> OrientationEnsemble:
        return cls("exhaustive", pairs, pairs)

    @classmethod
    def sampled(cls, n: int, seed: int) -> OrientationEnsemble:
        stream = SeededStream(seed, ORIENTATION_DOMAIN)
        words = stream.block(0, n)
        n_plus = int(np.count_nonzero(words[:, 0] >> np.uint64(63)))
        return cls("sampled", n_plus, n - n_plus)


def beable(mu: Orientation, n) -> Multivector:
    return dual(n, int(mu))


def joint_product(mu: Orientation, a, b) -> Quaternion:
    return bivector_product(a, b, int(mu))


def directed_expectation(ensemble: OrientationEnsemble, a, b) -> Multivector:
    """Equal-weight average of ``(mu a)(mu b)`` over the ensemble."""
    if ensemble.size == 0:
        raise DomainError("directed_expectation needs a nonempty ensemble")
    q_plus = quaternion_to_array(joint_product(Orientation.PLUS, a, b).as_array())
    q_minus = quaternion_to_array(joint_product(Orientation.MINUS, a, b).as_array())
    n = ensemble.size
    return Multivector((ensemble.n_plus / n) * q_plus + (ensemble.n_minus / n) * q_minus)


def expectation_parts(m: Multivector) -> tuple[float, np.ndarray]:
    """Split an expectation into its scalar part and its non-scalar residue (7 coefficients)."""
    return m.scalar_part, m.coefficients[1:].copy()
