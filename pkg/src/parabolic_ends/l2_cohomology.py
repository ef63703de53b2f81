"""Two-dimensional L2 cohomology spanned by h and F, with h^2 = d, F^2 = 0, h.F = 1."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._validation import ConfigurationError, check_rng

BASIS = ("h", "F")


@dataclass(frozen=True)
class CohClass:
    x_h: float
    x_F: float
    basis: tuple[str, str] = BASIS

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.x_h, self.x_F], dtype=float)

    @classmethod
    def from_vec(cls, v, basis: tuple[str, str] = BASIS) -> "CohClass":
        return cls(float(v[0]), float(v[1]), basis)

    def __add__(self, other: "CohClass") -> "CohClass":
        if self.basis != other.basis:
            raise ConfigurationError(f"basis mismatch: {self.basis} vs {other.basis}")
        return CohClass(self.x_h + other.x_h, self.x_F + other.x_F, self.basis)

    def __sub__(self, other: "CohClass") -> "CohClass":
        return self + (-other)

    def __neg__(self) -> "CohClass":
        return CohClass(-self.x_h, -self.x_F, self.basis)

    def __mul__(self, s: float) -> "CohClass":
        return CohClass(s * self.x_h, s * self.x_F, self.basis)

    __rmul__ = __mul__

    def to_json(self) -> list[float]:
        return [self.x_h, self.x_F]


H = CohClass(1.0, 0.0)
F = CohClass(0.0, 1.0)


@dataclass(frozen=True)
class IntersectionForm:
    d: int = 0

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.d, 1.0], [1.0, 0.0]])

    @property
    def det(self) -> float:
        return -1.0


def intersect(a: CohClass, b: CohClass, form: IntersectionForm) -> float:
    return float(a.vec @ form.matrix @ b.vec)


def square(a: CohClass, form: IntersectionForm) -> float:
    return intersect(a, a, form)


def signature(form: IntersectionForm) -> tuple[int, int]:
    ev = np.linalg.eigvalsh(form.matrix)
    return int(np.sum(ev > 0)), int(np.sum(ev < 0))


def selfdual_part(b: CohClass, omega: CohClass, form: IntersectionForm) -> CohClass:
    """Projection (b.w / w^2) w onto the positive line of a Kahler class."""
    w2 = square(omega, form)
    if w2 <= 0:
        raise ValueError(f"omega must have positive square, got {w2}")
    return (intersect(b, omega, form) / w2) * omega


@dataclass(frozen=True)
class KahlerClassSeq:
    classes: tuple[CohClass, ...]
    limit: CohClass

    def validate(self, form: IntersectionForm) -> None:
        for k, w in enumerate(self.classes):
            if square(w, form) <= 0 or intersect(w, F, form) <= 0:
                raise ValueError(f"class {k} is not in the Kahler cone (w^2 > 0, w.F > 0)")


def selfdual_convergence(b: CohClass, seq: KahlerClassSeq, form: IntersectionForm) -> tuple[list[CohClass], list[float]]:
    seq.validate(form)
    target = selfdual_part(b, seq.limit, form)
    parts = [selfdual_part(b, w, form) for w in seq.classes]
    devs = [float(np.linalg.norm(p.vec - target.vec)) for p in parts]
    return parts, devs


@dataclass(frozen=True)
class ChamberResult:
    pairing: float
    satisfied: bool


def chamber_condition(l2c1: CohClass, omega: CohClass, form: IntersectionForm) -> ChamberResult:
    pairing = intersect(selfdual_part(l2c1, omega, form), omega, form)
    return ChamberResult(pairing, pairing < 0)


def required_pairing(s: float, omega: CohClass, form: IntersectionForm) -> float:
    """Value of L2c1 . w forced by constant scalar curvature s."""
    return s / (8 * math.pi) * square(omega, form)


def scalar_pairing_identity(s: float, omega: CohClass, form: IntersectionForm, l2c1: CohClass | None = None, tol: float = 1e-12):
    """Required pairing, and whether a supplied class meets it within tol."""
    need = required_pairing(s, omega, form)
    if l2c1 is None:
        return need, None
    return need, abs(intersect(l2c1, omega, form) - need) < tol


def class_with_pairing(value: float, omega: CohClass, form: IntersectionForm) -> CohClass:
    """The multiple of w whose pairing with w equals value."""
    return (value / square(omega, form)) * omega


@dataclass(frozen=True)
class InvolutionAction:
    matrix: np.ndarray

    def __call__(self, a: CohClass) -> CohClass:
        return CohClass.from_vec(self.matrix @ a.vec, a.basis)


def antipodal_involution(d: int) -> InvolutionAction:
    """Sign-reversing involution for h^2 = d.

    Take diag(1, -1) for d = 0 and conjugate by the change of basis
    (h - (d/2) F, F), which carries the form with h^2 = d to the d = 0 one.
    """
    P = np.array([[1.0, 0.0], [-d / 2, 1.0]])
    iota0 = np.diag([1.0, -1.0])
    return InvolutionAction(P @ iota0 @ np.linalg.inv(P))


@dataclass(frozen=True)
class AntipodalReport:
    involution_residual: float
    anti_isometry_residual: float
    max_self_pairing: float
    cone_exchanged: bool
    samples: int


def antipodal_check(iota: InvolutionAction, form: IntersectionForm, samples: int = 1000, seed=0, tol: float = 1e-10) -> AntipodalReport:
    M, Q = iota.matrix, form.matrix
    inv_res = float(np.max(np.abs(M @ M - np.eye(2))))
    anti_res = float(np.max(np.abs(M.T @ Q @ M + Q)))
    if inv_res > tol or anti_res > tol:
        raise ValueError(f"not a sign-reversing involution (residuals {inv_res:.3g}, {anti_res:.3g})")
    rng = check_rng(seed)
    worst = 0.0
    exchanged = True
    pos = 0
    while pos < samples:
        a = CohClass.from_vec(rng.normal(size=2) * 3)
        ia = iota(a)
        scale = 1 + np.dot(a.vec, a.vec)
        worst = max(worst, abs(intersect(a, ia, form)) / scale)
        a2 = square(a, form)
        if a2 > 0:
            pos += 1
            if not square(ia, form) < 0:
                exchanged = False
        elif a2 < 0 and not square(ia, form) > 0:
            exchanged = False
    return AntipodalReport(inv_res, anti_res, worst, exchanged, samples)


@dataclass(frozen=True)
class StrictTransformWeight:
    alpha: float
    status: str  # "valid", "boundary" or "invalid"


def weight_from_strict_transform(pE: float, pF: float) -> StrictTransformWeight:
    if pF == 0:
        raise ZeroDivisionError("the fiber pairing must be non-zero")
    alpha = pE / pF
    if 0 < alpha < 1:
        status = "valid"
    elif alpha == 0:
        status = "boundary"
    else:
        status = "invalid"
    return StrictTransformWeight(alpha, status)


def l2_chern_sum(components: Sequence[CohClass]) -> CohClass:
    if not components:
        raise ValueError("need at least one component")
    total = components[0]
    for c in components[1:]:
        total = total + c
    return total


def anticanonical_ruled(genus: int, d: int) -> CohClass:
    """c1(K^-1) = 2h - (2g - 2 + d) F on the ruled surface with h^2 = d.

    Adjunction helper, not part of the verified identities.
    """
    return CohClass(2.0, -(2 * genus - 2 + d))
