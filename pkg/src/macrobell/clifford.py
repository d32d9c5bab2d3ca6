"""Dense kernel for the Euclidean geometric algebra Cl(3,0).

Conventions
-----------

Every multivector is stored as 8 coefficients over the ordered basis::

    1, e_x, e_y, e_z, e_x^e_y, e_y^e_z, e_z^e_x, I

with ``I = e_x e_y e_z``.  Duality is cyclic: ``I e_x = e_y^e_z``,
``I e_y = e_z^e_x``, ``I e_z = e_x^e_y``.

Quaternions are elements of the even subalgebra, written ``(w, x, y, z)`` for
``w + x I e_x + y I e_y + z I e_z``.  Those coefficients are always relative to
the fixed (right-handed) bivector basis; :meth:`Quaternion.frame_coordinates`
re-expresses them in the basis ``{mu e_x, mu e_y, mu e_z}`` attached to an
orientation ``mu = +/-I``.

The array-level functions (``product_array``, ``dual_array``, ...) broadcast
over leading axes and are what the bulk property checks use.  The value
classes wrap single elements.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from macrobell.errors import DomainError

BASIS = ("1", "e_x", "e_y", "e_z", "e_x^e_y", "e_y^e_z", "e_z^e_x", "I")
GRADES = np.array([0, 1, 1, 1, 2, 2, 2, 3])

# Constructors accept this much slack on unit norm and renormalize.
UNIT_SLACK = 1e-9

# blade k == _SIGNS[k] * (ascending product of the generators in _BITMAPS[k])
_BITMAPS = (0b000, 0b001, 0b010, 0b100, 0b011, 0b110, 0b101, 0b111)
_SIGNS = (1, 1, 1, 1, 1, 1, -1, 1)
_INDEX_OF_BITMAP = {bm: k for k, bm in enumerate(_BITMAPS)}

_VECTOR_SLOTS = (1, 2, 3)
# I e_x, I e_y, I e_z live in these slots with these signs.
_DUAL_INDEX = np.array([5, 6, 4])
_DUAL_SIGN = np.array([1.0, 1.0, 1.0])
# Quaternion (w, x, y, z) <-> multivector slots; fixed, never derived from _DUAL_*.
_QUATERNION_SLOTS = np.array([0, 5, 6, 4])
_REVERSE_SIGNS = np.array([1.0, 1.0, 1.0, 1.0, -1.0, -1.0, -1.0, -1.0])


def _reorder_sign(a: int, b: int) -> int:
    a >>= 1
    swaps = 0
    while a:
        swaps += bin(a & b).count("1")
        a >>= 1
    return -1 if swaps & 1 else 1


def _build_product_table() -> np.ndarray:
    table = np.zeros((8, 8, 8))
    for i, bm_i in enumerate(_BITMAPS):
        for j, bm_j in enumerate(_BITMAPS):
            k = _INDEX_OF_BITMAP[bm_i ^ bm_j]
            table[i, j, k] = _SIGNS[i] * _SIGNS[j] * _reorder_sign(bm_i, bm_j) * _SIGNS[k]
    table.setflags(write=False)
    return table


PRODUCT_TABLE = _build_product_table()
_PRODUCT_FLAT = PRODUCT_TABLE.reshape(64, 8)


# ----------------------------------------------------------------------------
# array-level kernel


def product_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Geometric product of coefficient arrays of shape (..., 8)."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    outer = p[..., :, None] * q[..., None, :]
    return outer.reshape(outer.shape[:-2] + (64,)) @ _PRODUCT_FLAT


def vector_array(n: np.ndarray) -> np.ndarray:
    """Embed (..., 3) vectors as grade-1 multivectors."""
    n = np.asarray(n, dtype=float)
    out = np.zeros(n.shape[:-1] + (8,))
    out[..., _VECTOR_SLOTS] = n
    return out


def pseudoscalar_array(sign) -> np.ndarray:
    sign = np.asarray(sign, dtype=float)
    out = np.zeros(sign.shape + (8,))
    out[..., 7] = sign
    return out


def dual_array(n: np.ndarray, sign) -> np.ndarray:
    """``mu n`` for ``mu = sign * I``; pure grade 2."""
    n = np.asarray(n, dtype=float)
    sign = np.asarray(sign, dtype=float)[..., None]
    out = np.zeros(np.broadcast_shapes(n.shape, sign.shape)[:-1] + (8,))
    out[..., _DUAL_INDEX] = sign * _DUAL_SIGN * n
    return out


def reverse_array(p: np.ndarray) -> np.ndarray:
    return np.asarray(p, dtype=float) * _REVERSE_SIGNS


def quaternion_to_array(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    out = np.zeros(q.shape[:-1] + (8,))
    out[..., _QUATERNION_SLOTS] = q
    return out


def array_to_quaternion(p: np.ndarray) -> np.ndarray:
    return np.asarray(p, dtype=float)[..., _QUATERNION_SLOTS]


def hopf_array(q: np.ndarray) -> np.ndarray:
    """Grade-1 part of ``q e_z q~`` for (..., 4) quaternion arrays."""
    qm = quaternion_to_array(q)
    image = product_array(product_array(qm, vector_array([0.0, 0.0, 1.0])), reverse_array(qm))
    return image[..., _VECTOR_SLOTS]


# ----------------------------------------------------------------------------
# value types


class Multivector:
    """Immutable element of Cl(3,0) with dense coefficients."""

    __slots__ = ("_c",)

    def __init__(self, coefficients: Sequence[float] = (0.0,) * 8):
        c = np.array(coefficients, dtype=float)
        if c.shape != (8,):
            raise DomainError(f"a multivector needs 8 coefficients, got shape {c.shape}")
        c.setflags(write=False)
        self._c = c

    @classmethod
    def scalar(cls, value: float) -> Multivector:
        return cls([value, 0, 0, 0, 0, 0, 0, 0])

    @classmethod
    def vector(cls, v) -> Multivector:
        return cls(vector_array(np.asarray(v, dtype=float)))

    @classmethod
    def basis(cls, label: str) -> Multivector:
        c = np.zeros(8)
        c[BASIS.index(label)] = 1.0
        return cls(c)

    @property
    def coefficients(self) -> np.ndarray:
        return self._c

    def __array__(self, dtype=None, copy=None):
        return self._c if dtype is None else self._c.astype(dtype)

    def __getitem__(self, label: str | int) -> float:
        index = BASIS.index(label) if isinstance(label, str) else label
        return float(self._c[index])

    def __add__(self, other):
        if isinstance(other, Multivector):
            return Multivector(self._c + other._c)
        if isinstance(other, (int, float)):
            return self + Multivector.scalar(other)
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return Multivector(-self._c)

    def __sub__(self, other):
        if isinstance(other, (Multivector, int, float)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Multivector):
            return Multivector(product_array(self._c, other._c))
        if isinstance(other, (int, float)):
            return Multivector(self._c * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self._c * other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return Multivector(self._c / other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Multivector):
            return NotImplemented
        return bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        terms = [f"{c!r}*{b}" for c, b in zip(self._c.tolist(), BASIS) if c != 0.0]
        return f"Multivector({' + '.join(terms) or '0'})"

    def grade(self, k: int) -> Multivector:
        """Projection onto grade ``k``; other coefficients are exactly zero."""
        return Multivector(np.where(GRADES == k, self._c, 0.0))

    def reverse(self) -> Multivector:
        return Multivector(reverse_array(self._c))

    def allclose(self, other: Multivector, atol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self._c - other._c) <= atol))

    @property
    def scalar_part(self) -> float:
        return float(self._c[0])

    @property
    def vector_part(self) -> np.ndarray:
        return self._c[1:4].copy()

    @property
    def bivector_part(self) -> np.ndarray:
        """Coefficients on (e_x^e_y, e_y^e_z, e_z^e_x)."""
        return self._c[4:7].copy()

    @property
    def trivector_part(self) -> float:
        return float(self._c[7])

    def to_list(self) -> list[float]:
        return self._c.tolist()

    def to_json(self) -> str:
        return json.dumps(self.to_list())

    @classmethod
    def from_json(cls, text: str) -> Multivector:
        return cls(json.loads(text))


ONE = Multivector.basis("1")
E_X = Multivector.basis("e_x")
E_Y = Multivector.basis("e_y")
E_Z = Multivector.basis("e_z")
E_XY = Multivector.basis("e_x^e_y")
E_YZ = Multivector.basis("e_y^e_z")
E_ZX = Multivector.basis("e_z^e_x")
I = Multivector.basis("I")


def _check_orientation(sign: int) -> int:
    if sign not in (1, -1):
        raise DomainError(f"orientation must be +1 or -1, got {sign!r}")
    return int(sign)


def _sincos_deg(angle_deg: float) -> tuple[float, float]:
    # Reduce by half turns first so that t and t + 180 negate exactly
    # whenever the reduction itself is exact (integer degrees, for one).
    half, rest = divmod(float(angle_deg), 180.0)
    sign = -1.0 if int(half) % 2 else 1.0
    if rest == 0.0:
        s, c = 0.0, 1.0
    elif rest == 90.0:
        s, c = 1.0, 0.0
    else:
        theta = math.radians(rest)
        s, c = math.sin(theta), math.cos(theta)
    return sign * s, sign * c


@dataclass(frozen=True)
class UnitVector:
    """Point on the unit 2-sphere.

    Inputs within ``UNIT_SLACK`` of unit norm are renormalized; anything further
    off raises :class:`DomainError`.
    """

    x: float
    y: float
    z: float

    def __post_init__(self):
        x, y, z = float(self.x), float(self.y), float(self.z)
        norm = math.sqrt(x * x + y * y + z * z)
        if not math.isfinite(norm) or abs(norm - 1.0) > UNIT_SLACK:
            raise DomainError(f"({x}, {y}, {z}) is not a unit vector (norm {norm})")
        if norm != 1.0:
            x, y, z = x / norm, y / norm, z / norm
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    @classmethod
    def from_array(cls, v) -> UnitVector:
        x, y, z = (float(c) for c in np.asarray(v, dtype=float).reshape(3))
        return cls(x, y, z)

    @classmethod
    def normalize(cls, v) -> UnitVector:
        v = np.asarray(v, dtype=float).reshape(3)
        norm = float(np.linalg.norm(v))
        if norm == 0.0 or not math.isfinite(norm):
            raise DomainError("cannot normalize a zero or non-finite vector")
        return cls.from_array(v / norm)

    @classmethod
    def from_angle(cls, angle_deg: float) -> UnitVector:
        """Direction at ``angle_deg`` from e_z towards e_x in the x-z plane.

        Multiples of 90 degrees are exact, and ``from_angle(t + 180)`` is the
        exact negation of ``from_angle(t)``.
        """
        angle = float(angle_deg) % 360.0
        if angle >= 180.0:
            return -cls.from_angle(angle - 180.0)
        s, c = _sincos_deg(angle)
        return cls(s, 0.0, c)

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y, self.z], dtype=dtype or float)

    def __neg__(self) -> UnitVector:
        return UnitVector(-self.x, -self.y, -self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def dot(self, other) -> float:
        o = np.asarray(other, dtype=float)
        return float(self.x * o[0] + self.y * o[1] + self.z * o[2])

    def cross(self, other) -> np.ndarray:
        return np.cross(self.as_array(), np.asarray(other, dtype=float))

    def to_multivector(self) -> Multivector:
        return Multivector.vector(self.as_array())


E_X_HAT = UnitVector(1.0, 0.0, 0.0)
E_Y_HAT = UnitVector(0.0, 1.0, 0.0)
E_Z_HAT = UnitVector(0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Quaternion:
    """Even-grade element ``w + x I e_x + y I e_y + z I e_z``."""

    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_multivector(cls, m: Multivector, atol: float = 1e-12) -> Quaternion:
        c = m.coefficients
        odd = np.abs(c[GRADES % 2 == 1])
        if odd.size and odd.max() > atol:
            raise DomainError(f"{m!r} has odd-grade content and is not a quaternion")
        return cls(*(float(v) for v in array_to_quaternion(c)))

    @classmethod
    def from_array(cls, q) -> Quaternion:
        return cls(*(float(v) for v in np.asarray(q, dtype=float).reshape(4)))

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __array__(self, dtype=None, copy=None):
        return np.array([self.w, self.x, self.y, self.z], dtype=dtype or float)

    def to_multivector(self) -> Multivector:
        return Multivector(quaternion_to_array(self.as_array()))

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_multivector(self.to_multivector() * other.to_multivector())
        return NotImplemented

    def reverse(self) -> Quaternion:
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return quaternion_norm(self)

    def normalized(self) -> Quaternion:
        n = self.norm()
        if n == 0.0:
            raise DomainError("cannot normalize the zero quaternion")
        return Quaternion(self.w / n, self.x / n, self.y / n, self.z / n)

    @property
    def scalar_part(self) -> float:
        return self.w

    @property
    def bivector_coefficients(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def frame_coordinates(self, orientation: int) -> np.ndarray:
        """Coefficients over ``{1, mu e_x, mu e_y, mu e_z}`` with ``mu = orientation * I``."""
        s = _check_orientation(orientation)
        return np.array([self.w, s * self.x, s * self.y, s * self.z])


# ----------------------------------------------------------------------------
# operations


def geometric_product(p: Multivector, q: Multivector) -> Multivector:
    return Multivector(product_array(p.coefficients, q.coefficients))


def dual(x, orientation: int = 1) -> Multivector:
    """Bivector ``mu x`` for ``mu = orientation * I``; squares to -1 for unit ``x``."""
    s = _check_orientation(orientation)
    return Multivector(dual_array(np.asarray(x, dtype=float), s))


def bivector_product(a, b, orientation: int = 1) -> Quaternion:
    """Clifford product ``(mu a)(mu b)`` of two dual bivectors.

    In the frame of ``mu`` the coordinates are ``(-a.b, -s (a x b))``; in the
    fixed basis the bivector part is ``-I (a x b)`` for both orientations,
    since ``mu`` is central and ``mu**2 = -1``.
    """
    s = _check_orientation(orientation)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    prod = product_array(dual_array(a, s), dual_array(b, s))
    return Quaternion.from_multivector(Multivector(prod))


def quaternion_norm(q: Quaternion) -> float:
    return math.sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z)


def rotor(axis, angle: float) -> Quaternion:
    """``exp(-I axis angle / 2)``: rotates vectors by ``angle`` about ``axis`` via ``R v R~``."""
    ax = np.asarray(UnitVector.from_array(axis), dtype=float)
    half = 0.5 * angle
    s = math.sin(half)
    return Quaternion(math.cos(half), -s * ax[0], -s * ax[1], -s * ax[2])


def fiber_rotor(angle: float) -> Quaternion:
    """``exp(angle e_x^e_y)``, which fixes the Hopf base point e_z."""
    return Quaternion(math.cos(angle), 0.0, 0.0, math.sin(angle))


def hopf_map(q: Quaternion) -> UnitVector:
    """Project a unit quaternion to S^2 as the grade-1 part of ``q e_z q~``."""
    n = quaternion_norm(q)
    if not math.isfinite(n) or abs(n - 1.0) > UNIT_SLACK:
        raise DomainError(f"hopf_map needs a unit quaternion, got norm {n}")
    if n != 1.0:
        q = q.normalized()
    return UnitVector.from_array(hopf_array(q.as_array()))
