"""Randomized identity checks for the Cl(3,0) kernel.

Each check evaluates one identity on ``count`` random cases with the
array-level kernel and reports the worst deviation.  A check fails when that
deviation exceeds its tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from macrobell import clifford as cl

TOLERANCE = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    identity: str
    cases: int
    max_error: float
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name:<22} max_err={self.max_error:.3e} tol={self.tolerance:.0e} n={self.cases}  {self.identity}"


def _unit_vectors(rng: np.random.Generator, n: int) -> np.ndarray:
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _unit_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    q = rng.standard_normal((n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _signs(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.choice(np.array([-1.0, 1.0]), size=n)


def _max(a) -> float:
    a = np.abs(np.asarray(a, dtype=float))
    return float(a.max()) if a.size else 0.0


def _basis(k: int) -> np.ndarray:
    e = np.zeros(8)
    e[k] = 1.0
    return e


def check_anticommutation(rng, count) -> CheckResult:
    errs = []
    for i in (1, 2, 3):
        ei = _basis(i)
        errs.append(cl.product_array(ei, ei) - _basis(0))
        for j in (1, 2, 3):
            if i != j:
                ej = _basis(j)
                errs.append(cl.product_array(ei, ej) + cl.product_array(ej, ei))
    exact = _max(errs)
    x = _unit_vectors(rng, count)
    y = _unit_vectors(rng, count)
    xm, ym = cl.vector_array(x), cl.vector_array(y)
    sym = cl.product_array(xm, ym) + cl.product_array(ym, xm)
    expected = np.zeros_like(sym)
    expected[:, 0] = 2.0 * np.einsum("ij,ij->i", x, y)
    # Basis relations must hold exactly; the random part gets the tolerance.
    return CheckResult(
        "anticommutation", "e_i e_j + e_j e_i = 2 delta_ij", count + 9,
        np.inf if exact != 0.0 else _max(sym - expected),
    )


def check_pseudoscalar(rng, count) -> CheckResult:
    pseudo = _basis(7)
    errs = [cl.product_array(pseudo, pseudo) + _basis(0)]
    for k in range(8):
        e = _basis(k)
        errs.append(cl.product_array(pseudo, e) - cl.product_array(e, pseudo))
    exact = _max(errs)
    p = rng.uniform(-1.0, 1.0, (count, 8))
    central = cl.product_array(pseudo, p) - cl.product_array(p, pseudo)
    return CheckResult(
        "pseudoscalar", "I^2 = -1 and I central", count + 9,
        np.inf if exact != 0.0 else _max(central),
    )


def check_associativity(rng, count) -> CheckResult:
    p, q, r = (rng.uniform(-1.0, 1.0, (count, 8)) for _ in range(3))
    lhs = cl.product_array(cl.product_array(p, q), r)
    rhs = cl.product_array(p, cl.product_array(q, r))
    return CheckResult("associativity", "(pq)r = p(qr)", count, _max(lhs - rhs))


def check_duality(rng, count) -> CheckResult:
    n = _unit_vectors(rng, count)
    s = _signs(rng, count)
    d = cl.dual_array(n, s)
    via_product = cl.product_array(cl.pseudoscalar_array(s), cl.vector_array(n))
    err = _max(d - via_product)
    if _max(d[:, cl.GRADES != 2]) != 0.0:
        err = np.inf
    return CheckResult("duality", "dual(n, s) = (s I) n, pure grade 2", count, err)


def check_dual_square(rng, count) -> CheckResult:
    n = _unit_vectors(rng, count)
    s = _signs(rng, count)
    d = cl.dual_array(n, s)
    sq = cl.product_array(d, d)
    return CheckResult("dual-square", "(mu n)^2 = -1", count, _max(sq + _basis(0)))


def check_product_identity(rng, count) -> CheckResult:
    """(mu a)(mu b) in the frame of mu is (-a.b, -s (a x b)), and nothing else."""
    a = _unit_vectors(rng, count)
    b = _unit_vectors(rng, count)
    s = _signs(rng, count)
    prod = cl.product_array(cl.dual_array(a, s), cl.dual_array(b, s))
    q = cl.array_to_quaternion(prod)
    frame = np.concatenate([q[:, :1], s[:, None] * q[:, 1:]], axis=1)
    closed = np.concatenate(
        [-np.einsum("ij,ij->i", a, b)[:, None], -s[:, None] * np.cross(a, b)], axis=1
    )
    leftover = prod - cl.quaternion_to_array(q)
    return CheckResult(
        "product-identity", "(mu a)(mu b) = -a.b - mu (a x_mu b)", count,
        max(_max(frame - closed), _max(leftover)),
    )


def check_norm_multiplicativity(rng, count) -> CheckResult:
    p = rng.uniform(-1.0, 1.0, (count, 4))
    q = rng.uniform(-1.0, 1.0, (count, 4))
    pq = cl.product_array(cl.quaternion_to_array(p), cl.quaternion_to_array(q))
    lhs = np.linalg.norm(cl.array_to_quaternion(pq), axis=1)
    rhs = np.linalg.norm(p, axis=1) * np.linalg.norm(q, axis=1)
    return CheckResult("norm-multiplicativity", "|pq| = |p||q|", count, _max(lhs - rhs))


def check_hopf_fiber(rng, count) -> CheckResult:
    q = _unit_quaternions(rng, count)
    theta = rng.uniform(-np.pi, np.pi, count)
    fiber = np.stack([np.cos(theta), np.zeros(count), np.zeros(count), np.sin(theta)], axis=1)
    moved = cl.array_to_quaternion(cl.product_array(cl.quaternion_to_array(q), cl.quaternion_to_array(fiber)))
    base = cl.hopf_array(q)
    shifted = cl.hopf_array(moved)
    unit_err = np.linalg.norm(base, axis=1) - 1.0
    return CheckResult(
        "hopf-fiber", "h(q exp(t e_x^e_y)) = h(q), |h(q)| = 1", count,
        max(_max(shifted - base), _max(unit_err)),
    )


ALL_CHECKS = (
    check_anticommutation,
    check_pseudoscalar,
    check_associativity,
    check_duality,
    check_dual_square,
    check_product_identity,
    check_norm_multiplicativity,
    check_hopf_fiber,
)


def run_algebra_suite(count: int = 10_000, seed: int = 0) -> list[CheckResult]:
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(seed)
    return [check(rng, count) for check in ALL_CHECKS]
