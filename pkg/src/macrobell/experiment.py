"""Numerical run of the two-shell bomb-fragment experiment.

The protocol has two phases.  First every trial's spin axis is recorded (the
"3D map"): station 1 stores ``lambda_j`` and station 2 stores ``-lambda_j``.
Only then are detector directions chosen, from a separate stream, and the
sign products averaged.  :func:`generate_ensemble` hands out a
:class:`PhaseToken` that :func:`delayed_choice_settings` insists on, so the
settings stream cannot be consulted before recording is complete.
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from macrobell import bell
from macrobell.chsh import EmpiricalCorrelation, analytic_correlation_cosine
from macrobell.clifford import I, UnitVector, dual
from macrobell.errors import DomainError, PhaseError
from macrobell.rng import ENSEMBLE_DOMAIN, SETTINGS_DOMAIN, SeededStream, check_seed, chunked

DEFAULT_ANGLES = (0.0, 30.0, 60.0, 90.0, 120.0, 150.0, 180.0)
DEFAULT_LATTICE_SIZE = 10**6


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int
    seed: int = 0
    settings_seed: int = 1
    mode: str = "continuous"
    lattice_size: int = DEFAULT_LATTICE_SIZE
    lattice: str = "fibonacci"
    angles_deg: tuple[float, ...] = DEFAULT_ANGLES
    settings_mode: str = "angles"
    tie_eps: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "angles_deg", tuple(float(t) for t in self.angles_deg))
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}")
        check_seed(self.seed)
        check_seed(self.settings_seed)
        if self.mode not in ("continuous", "discrete"):
            raise DomainError(f"mode must be 'continuous' or 'discrete', got {self.mode!r}")
        if self.mode == "discrete" and self.lattice_size < 2:
            raise DomainError("discrete mode needs at least 2 lattice points")
        if self.lattice not in ("fibonacci", "octahedral"):
            raise DomainError(f"unknown lattice {self.lattice!r}")
        if self.lattice == "octahedral" and self.lattice_size != 6:
            raise DomainError("the octahedral lattice has exactly 6 points")
        if not self.angles_deg:
            raise DomainError("the angle list is empty")
        for t in self.angles_deg:
            if not 0.0 <= t <= 180.0:
                raise DomainError(f"angle {t} lies outside [0, 180] degrees")
        if self.settings_mode not in ("angles", "random"):
            raise DomainError(f"settings_mode must be 'angles' or 'random', got {self.settings_mode!r}")
        if not self.tie_eps >= 0.0:
            raise DomainError("tie_eps must be nonnegative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["angles_deg"] = list(self.angles_deg)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        return cls(**{**d, "angles_deg": tuple(d.get("angles_deg", DEFAULT_ANGLES))})


# ----------------------------------------------------------------------------
# lattices


@functools.lru_cache(maxsize=4)
def fibonacci_lattice(m: int) -> np.ndarray:
    """``m`` near-uniform points on S^2 along a golden-angle spiral, shape (m, 3)."""
    i = np.arange(m, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / m
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * (math.pi * (3.0 - math.sqrt(5.0)))
    pts = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    pts.setflags(write=False)
    return pts


def octahedral_lattice() -> np.ndarray:
    return np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float)


def lattice_points(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.lattice == "octahedral":
        return octahedral_lattice()
    return fibonacci_lattice(cfg.lattice_size)


# ----------------------------------------------------------------------------
# phase 1: recording


class PhaseToken:
    """Proof that an ensemble has been fully recorded; only :func:`generate_ensemble` mints one."""

    __slots__ = ("trials",)

    def __init__(self, _seal, trials: int):
        if _seal is not _SEAL:
            raise PhaseError("phase tokens are issued only by generate_ensemble")
        self.trials = trials


_SEAL = object()


@dataclass(frozen=True)
class Trial:
    index: int
    direction: UnitVector


@dataclass(frozen=True, eq=False)
class EnsembleRecord:
    """The recorded 3D map: one spin axis per trial, as seen by station 1."""

    directions: np.ndarray
    config: ExperimentConfig
    token: PhaseToken = field(repr=False)

    def __len__(self) -> int:
        return len(self.directions)

    def __getitem__(self, j: int) -> Trial:
        return Trial(j, UnitVector.from_array(self.directions[j]))

    def __iter__(self):
        return (self[j] for j in range(len(self)))

    @property
    def station_one(self) -> np.ndarray:
        return self.directions

    @property
    def station_two(self) -> np.ndarray:
        return -self.directions


def generate_ensemble(cfg: ExperimentConfig, workers: int = 1) -> EnsembleRecord:
    """Record ``cfg.trials`` spin axes.

    Trial ``j`` depends only on ``(cfg.seed, j)``; ``workers`` changes
    wall-clock time, not output.
    """
    stream = SeededStream(cfg.seed, ENSEMBLE_DOMAIN)
    if cfg.mode == "continuous":
        directions = chunked(cfg.trials, lambda s, c: bell.isotropic_directions(stream, s, c), workers)
    else:
        points = lattice_points(cfg)
        m = np.uint64(len(points))
        index = chunked(cfg.trials, lambda s, c: stream.block(s, c)[:, 0] % m, workers)
        directions = points[index]
    directions = np.ascontiguousarray(directions)
    directions.setflags(write=False)
    return EnsembleRecord(directions, cfg, PhaseToken(_SEAL, cfg.trials))


# ----------------------------------------------------------------------------
# phase 2: settings and estimation


def delayed_choice_settings(cfg: ExperimentConfig, phase_token, index: int = 0) -> tuple[UnitVector, UnitVector]:
    """Detector pair number ``index``, chosen after recording.

    In ``angles`` mode the pair is ``a = e_z`` and ``b`` at the configured
    angle in the x-z plane.  In ``random`` mode both directions are isotropic
    draws from the settings stream.
    """
    if not isinstance(phase_token, PhaseToken):
        raise PhaseError("detector settings requested before the ensemble was recorded")
    if cfg.settings_mode == "angles":
        return UnitVector.from_angle(0.0), UnitVector.from_angle(cfg.angles_deg[index])
    stream = SeededStream(cfg.settings_seed, SETTINGS_DOMAIN)
    pair = bell.isotropic_directions(stream, 2 * index, 2)
    return UnitVector.from_array(pair[0]), UnitVector.from_array(pair[1])


def empirical_correlation(ensemble, a, b, tie_eps: Optional[float] = None) -> tuple[float, float]:
    """Mean of ``sign(lambda_j.a) sign(-lambda_j.b)`` and its standard error sqrt((1 - E^2)/N)."""
    if tie_eps is None:
        tie_eps = ensemble.config.tie_eps if isinstance(ensemble, EnsembleRecord) else 0.0
    est = EmpiricalCorrelation(ensemble, tie_eps)
    e = est(a, b)
    return e, est.standard_error(a, b)


@dataclass(frozen=True)
class CorrelationRow:
    angle_deg: float
    a_dot_b: float
    e_empirical: float
    e_linear: float
    e_cosine: float
    std_error: float
    trials: int


@dataclass(frozen=True)
class Comparison:
    rows: list[CorrelationRow]
    max_sigma_linear: float
    max_sigma_cosine: float

    def summary(self) -> dict:
        return {
            "max_sigma_from_linear": self.max_sigma_linear,
            "max_sigma_from_cosine": self.max_sigma_cosine,
        }


def distance_in_se(value: float, prediction: float, se: float) -> float:
    diff = abs(value - prediction)
    if se > 0.0:
        return diff / se
    return 0.0 if diff == 0.0 else math.inf


def compare_predictions(cfg: ExperimentConfig, workers: int = 1, ensemble: Optional[EnsembleRecord] = None) -> Comparison:
    """Run record-then-choose for every configured setting and tabulate both predictions."""
    if ensemble is None:
        ensemble = generate_ensemble(cfg, workers)
    est = EmpiricalCorrelation(ensemble, cfg.tie_eps)
    rows = []
    for k in range(len(cfg.angles_deg)):
        a, b = delayed_choice_settings(cfg, ensemble.token, k)
        dot = a.dot(b)
        if cfg.settings_mode == "angles":
            angle = cfg.angles_deg[k]
        else:
            angle = math.degrees(math.acos(min(1.0, max(-1.0, dot))))
        e = est(a, b)
        rows.append(
            CorrelationRow(
                angle_deg=angle,
                a_dot_b=dot,
                e_empirical=e,
                e_linear=bell.analytic_correlation_linear(a, b),
                e_cosine=analytic_correlation_cosine(a, b),
                std_error=est.standard_error(a, b),
                trials=len(ensemble),
            )
        )
    return Comparison(
        rows,
        max(distance_in_se(r.e_empirical, r.e_linear, r.std_error) for r in rows),
        max(distance_in_se(r.e_empirical, r.e_cosine, r.std_error) for r in rows),
    )


# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    """Outcome recorded for one (lambda, n), once per representation of the local variable."""

    outcome: int
    beable_plus: object
    beable_minus: object
    outcome_plus: int
    outcome_minus: int

    @property
    def identical(self) -> bool:
        return self.outcome == self.outcome_plus == self.outcome_minus


def _outcome_from_beable(lam, beable, sign: int, tie_eps: float) -> int:
    # mu (mu n) = -n, so the detector direction is read back off the bivector.
    mu = float(sign) * I
    recovered = -(mu * beable).vector_part
    return bell.observable_A(recovered, lam, tie_eps)


def operational_identity_check(lam, n, tie_eps: float = 0.0) -> IdentityReport:
    """Compare the scalar sign record with the one read from either bivector label."""
    plus = dual(n, 1)
    minus = dual(n, -1)
    return IdentityReport(
        outcome=bell.observable_A(n, lam, tie_eps),
        beable_plus=plus,
        beable_minus=minus,
        outcome_plus=_outcome_from_beable(lam, plus, 1, tie_eps),
        outcome_minus=_outcome_from_beable(lam, minus, -1, tie_eps),
    )


def operational_identity_mismatches(lams: np.ndarray, ns: np.ndarray, tie_eps: float = 0.0) -> int:
    return sum(not operational_identity_check(l, n, tie_eps).identical for l, n in zip(lams, ns))

