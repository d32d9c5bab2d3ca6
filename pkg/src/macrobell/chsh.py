"""CHSH string evaluation and coplanar detector-setting scans."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from macrobell import bell
from macrobell.clifford import UnitVector
from macrobell.errors import DomainError

LINEAR = "analytic-linear"
COSINE = "analytic-cosine"
EMPIRICAL = "empirical"
CONSTANT = "constant"

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_SIGN_CHUNK = 1 << 16
# Grid values this close to the maximum count as ties.
TIE_TOL = 1e-12


def analytic_correlation_cosine(a, b) -> float:
    """-a.b, the correlation of the trivector model."""
    return -float(np.dot(np.asarray(a, dtype=float), np.asarray(b, dtype=float)))


@dataclass(frozen=True)
class DetectorSettings:
    a: UnitVector
    a_prime: UnitVector
    b: UnitVector
    b_prime: UnitVector
    angles_deg: Optional[tuple[float, float, float, float]] = None

    @classmethod
    def coplanar(cls, a_deg, a_prime_deg, b_deg, b_prime_deg) -> DetectorSettings:
        angles = (float(a_deg), float(a_prime_deg), float(b_deg), float(b_prime_deg))
        return cls(*(UnitVector.from_angle(t) for t in angles), angles_deg=angles)

    def pairs(self):
        return ((self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime))


@dataclass(frozen=True)
class CorrelationSource:
    """A correlation function E(a, b) with optional standard error.

    ``pair_matrix`` evaluates ``E(d_i, d_j)`` for a whole direction grid at
    once; when absent, the scan falls back to pointwise calls.
    """

    kind: str
    correlation: Callable[[object, object], float]
    standard_error: Optional[Callable[[object, object], float]] = None
    pair_matrix: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    continuous: bool = True

    def __call__(self, a, b) -> float:
        return self.correlation(a, b)

    def matrix(self, directions: np.ndarray) -> np.ndarray:
        if self.pair_matrix is not None:
            return self.pair_matrix(directions)
        k = len(directions)
        out = np.empty((k, k))
        for i in range(k):
            for j in range(k):
                out[i, j] = self.correlation(directions[i], directions[j])
        return out


def _clipped_gram(directions: np.ndarray) -> np.ndarray:
    return np.clip(directions @ directions.T, -1.0, 1.0)


def linear_source() -> CorrelationSource:
    return CorrelationSource(
        LINEAR,
        bell.analytic_correlation_linear,
        pair_matrix=lambda d: -1.0 + 2.0 * np.arccos(_clipped_gram(d)) / math.pi,
    )


def cosine_source() -> CorrelationSource:
    return CorrelationSource(COSINE, analytic_correlation_cosine, pair_matrix=lambda d: -(d @ d.T))


def constant_source(value: float = 0.0) -> CorrelationSource:
    return CorrelationSource(CONSTANT, lambda a, b: value, pair_matrix=lambda d: np.full((len(d), len(d)), value))


class EmpiricalCorrelation:
    """Estimator ``(1/N) sum_j A_a(lambda_j) B_b(lambda_j)`` over a recorded ensemble."""

    def __init__(self, ensemble, tie_eps: float = 0.0):
        self.directions = bell.as_directions(ensemble)
        if len(self.directions) == 0:
            raise DomainError("empirical correlation needs a nonempty ensemble")
        self.tie_eps = tie_eps

    @property
    def trials(self) -> int:
        return len(self.directions)

    def agreement(self, a, b) -> int:
        """``sum_j A_a A_b``; the estimate is its negation over N because B = -A."""
        sa = bell.outcomes(a, self.directions, self.tie_eps)
        sb = bell.outcomes(b, self.directions, self.tie_eps)
        return int(np.dot(sa.astype(np.int64), sb.astype(np.int64)))

    def __call__(self, a, b) -> float:
        return -self.agreement(a, b) / self.trials

    def standard_error(self, a, b) -> float:
        e = self(a, b)
        return math.sqrt(max(0.0, 1.0 - e * e) / self.trials)

    def matrix(self, grid: np.ndarray) -> np.ndarray:
        """``E(d_i, d_j)`` for all grid pairs, identical to pointwise evaluation.

        Directions that are exact negations of an earlier one reuse its
        outcomes with the sign flipped, since A(-n) = -A(n) holds exactly.
        """
        grid = np.asarray(grid, dtype=float)
        base_rows: list[int] = []
        seen: dict[bytes, int] = {}
        owner = np.empty(len(grid), dtype=np.intp)
        flip = np.ones(len(grid), dtype=np.int64)
        for i, row in enumerate(grid):
            partner = seen.get((-row).tobytes())
            if partner is not None:
                owner[i], flip[i] = partner, -1
            else:
                owner[i] = seen.setdefault(row.tobytes(), len(base_rows))
                if owner[i] == len(base_rows):
                    base_rows.append(i)
        base = grid[base_rows]
        k = len(base)
        gram = np.zeros((k, k), dtype=np.int64)
        for start in range(0, self.trials, _SIGN_CHUNK):
            chunk = self.directions[start : start + _SIGN_CHUNK]
            # Chunks stay below 2**24 rows, so float32 sums of +/-1 are exact.
            s = bell.sign_matrix(chunk, base, self.tie_eps).astype(np.float32)
            gram += np.rint(s.T @ s).astype(np.int64)
        full = gram[np.ix_(owner, owner)] * np.outer(flip, flip)
        return -full / self.trials


def empirical_source(ensemble, tie_eps: float = 0.0) -> CorrelationSource:
    est = EmpiricalCorrelation(ensemble, tie_eps)
    return CorrelationSource(EMPIRICAL, est, est.standard_error, est.matrix, continuous=False)


# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class ChshResult:
    settings: DetectorSettings
    value: float
    terms: tuple[float, float, float, float]
    term_errors: Optional[tuple[float, float, float, float]] = None

    @property
    def abs_value(self) -> float:
        return abs(self.value)

    @property
    def combined_error(self) -> Optional[float]:
        if self.term_errors is None:
            return None
        return math.sqrt(sum(e * e for e in self.term_errors))


def evaluate_chsh(src: CorrelationSource, settings: DetectorSettings) -> ChshResult:
    terms = tuple(src(x, y) for x, y in settings.pairs())
    e_ab, e_abp, e_apb, e_apbp = terms
    value = e_ab + e_abp + e_apb - e_apbp
    errors = None
    if src.standard_error is not None:
        errors = tuple(src.standard_error(x, y) for x, y in settings.pairs())
    return ChshResult(settings, value, terms, errors)


def chsh_value(src: CorrelationSource, settings: DetectorSettings) -> float:
    """E(a,b) + E(a,b') + E(a',b) - E(a',b')."""
    return evaluate_chsh(src, settings).value


@dataclass(frozen=True)
class ScanSpec:
    step_deg: float = 1.0
    refine: bool = False
    grid_deg: Optional[Sequence[float]] = None

    def grid(self) -> np.ndarray:
        if self.grid_deg is not None:
            grid = np.asarray(list(self.grid_deg), dtype=float)
        else:
            if not (math.isfinite(self.step_deg) and self.step_deg > 0.0):
                raise DomainError(f"scan step must be positive, got {self.step_deg}")
            grid = np.arange(0.0, 360.0, self.step_deg)
        if grid.size == 0:
            raise DomainError("the angle grid is empty")
        return grid


@dataclass(frozen=True)
class ScanResult:
    best: ChshResult
    grid_value: float
    grid_size: int
    refined: bool

    @property
    def max_abs(self) -> float:
        return self.best.abs_value

    @property
    def angles_deg(self) -> tuple[float, float, float, float]:
        return self.best.settings.angles_deg


def _first_within(values: np.ndarray, target: np.ndarray) -> np.ndarray:
    return (values >= target[:, None] - TIE_TOL).argmax(axis=1)


def _row_pair_values(m: np.ndarray, i: int):
    """Best |string| for every a' given a = grid[i], with the (b, b') attaining it.

    For fixed (a, a') the string splits into f(b) + g(b') with
    f = M[a,:] + M[a',:] and g = M[a,:] - M[a',:], so each row pair needs only
    the extrema of f and g.
    """
    f = m[i][None, :] + m
    g = m[i][None, :] - m
    f_max, g_max = f.max(axis=1), g.max(axis=1)
    f_min, g_min = f.min(axis=1), g.min(axis=1)
    jf_max, jg_max = _first_within(f, f_max), _first_within(g, g_max)
    jf_min, jg_min = _first_within(-f, -f_min), _first_within(-g, -g_min)
    v_pos = f_max + g_max
    v_neg = -(f_min + g_min)
    pos_first = (jf_max < jf_min) | ((jf_max == jf_min) & (jg_max <= jg_min))
    use_pos = np.where(np.abs(v_pos - v_neg) <= TIE_TOL, pos_first, v_pos > v_neg)
    values = np.where(use_pos, v_pos, v_neg)
    j = np.where(use_pos, jf_max, jf_min)
    jp = np.where(use_pos, jg_max, jg_min)
    return values, j, jp


def _grid_argmax(m: np.ndarray) -> tuple[tuple[int, int, int, int], float]:
    """Lexicographically first index quadruple within TIE_TOL of the grid maximum."""
    k = m.shape[0]
    top = max(float(_row_pair_values(m, i)[0].max()) for i in range(k))
    for i in range(k):
        values, j, jp = _row_pair_values(m, i)
        hits = np.flatnonzero(values >= top - TIE_TOL)
        if hits.size:
            ip = int(hits[0])
            return (i, ip, int(j[ip]), int(jp[ip])), top
    raise AssertionError("unreachable: the maximum lies on the grid")


def _golden_max(fn: Callable[[float], float], lo: float, hi: float, tol: float = 1e-11) -> float:
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = fn(c), fn(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = fn(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = fn(d)
    return 0.5 * (lo + hi)


def _polish(src: CorrelationSource, angles: list[float], step: float, max_sweeps: int = 200) -> list[float]:
    def objective(theta) -> float:
        return abs(chsh_value(src, DetectorSettings.coplanar(*theta)))

    centers = list(angles)
    current = list(angles)
    best = objective(current)
    for _ in range(max_sweeps):
        before = best
        for k in range(4):
            def along(t, k=k):
                trial = list(current)
                trial[k] = t
                return objective(trial)

            t = _golden_max(along, centers[k] - step, centers[k] + step)
            value = along(t)
            if value > best:
                current[k] = t
                best = value
        if best - before <= 1e-15:
            break
    return current


def max_abs_chsh(src: CorrelationSource, scan: ScanSpec = ScanSpec()) -> ScanResult:
    """Maximize |CHSH| over coplanar settings on the scan grid, optionally polished.

    Ties on the grid go to the lexicographically smallest index quadruple, so
    the result is fully determined by the grid.  Polishing runs only for
    continuous sources and only keeps strict improvements.
    """
    grid = scan.grid()
    directions = np.array([UnitVector.from_angle(t).as_array() for t in grid])
    m = src.matrix(directions)
    (i, ip, j, jp), _ = _grid_argmax(m)
    angles = [float(grid[i]), float(grid[ip]), float(grid[j]), float(grid[jp])]
    grid_best = evaluate_chsh(src, DetectorSettings.coplanar(*angles))
    best = grid_best
    refined = False
    if scan.refine and src.continuous:
        step = scan.step_deg if scan.grid_deg is None else float(np.max(np.diff(np.sort(grid)), initial=1.0))
        polished = evaluate_chsh(src, DetectorSettings.coplanar(*_polish(src, angles, step)))
        if polished.abs_value > grid_best.abs_value:
            best = polished
        refined = True
    return ScanResult(best, grid_best.abs_value, len(grid), refined)
