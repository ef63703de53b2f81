"""Exact slope calculus for rank-2 parabolic bundles on marked surfaces.

All weights and degrees are :class:`fractions.Fraction` so that the
stability comparisons are exact. Only the unitary-representation side
(:func:`puncture_holonomy`, :func:`is_irreducible`) uses floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._validation import ConfigurationError, as_fraction

STABLE = "stable"
SEMISTABLE_ONLY = "semistable_only"
UNSTABLE = "unstable"

INVARIANCE_TOL = 1e-9
UNITARY_TOL = 1e-12


@dataclass(frozen=True)
class ParabolicPoint:
    """A marked point with weights 0 <= alpha1 <= alpha2 < 1."""

    label: str
    alpha1: Fraction = Fraction(0)
    alpha2: Fraction = Fraction(0)

    def __post_init__(self):
        a1 = as_fraction(self.alpha1, "alpha1")
        a2 = as_fraction(self.alpha2, "alpha2")
        if not 0 <= a1 <= a2 < 1:
            raise ValueError(f"point {self.label!r}: need 0 <= alpha1 <= alpha2 < 1, got {a1}, {a2}")
        object.__setattr__(self, "alpha1", a1)
        object.__setattr__(self, "alpha2", a2)

    @classmethod
    def trivial(cls, label: str, alpha) -> "ParabolicPoint":
        return cls(label, alpha, alpha)

    @property
    def is_trivial(self) -> bool:
        return self.alpha1 == self.alpha2

    @property
    def multiplicities(self) -> tuple[tuple[Fraction, int], ...]:
        """Distinct weights with their multiplicities d_j."""
        if self.is_trivial:
            return ((self.alpha1, 2),)
        return ((self.alpha1, 1), (self.alpha2, 1))


@dataclass(frozen=True)
class MarkedSurface:
    genus: int = 0
    points: tuple[ParabolicPoint, ...] = ()

    def __post_init__(self):
        if int(self.genus) != self.genus or self.genus < 0:
            raise ValueError(f"genus must be a non-negative integer, got {self.genus!r}")
        pts = tuple(self.points)
        labels = [p.label for p in pts]
        if len(set(labels)) != len(labels):
            raise ValueError(f"point labels must be unique, got {labels}")
        object.__setattr__(self, "genus", int(self.genus))
        object.__setattr__(self, "points", pts)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.points)

    def with_points(self, extra: Iterable[ParabolicPoint]) -> "MarkedSurface":
        return MarkedSurface(self.genus, self.points + tuple(extra))


@dataclass(frozen=True)
class ParabolicBundle:
    base: MarkedSurface
    degree: int = 0
    rank: int = 2

    def __post_init__(self):
        if self.rank != 2:
            raise ValueError("only rank 2 bundles are supported")
        if int(self.degree) != self.degree:
            raise ValueError(f"degree must be an integer, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))


@dataclass(frozen=True)
class SubLineData:
    """A candidate destabilising line subbundle.

    ``flags[label]`` is True when the line is the flag line at that point
    (it inherits alpha2), False when it inherits alpha1. Trivial points
    need no entry.
    """

    degree: int
    flags: Mapping[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        if int(self.degree) != self.degree:
            raise ValueError(f"degree must be an integer, got {self.degree!r}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "flags", dict(self.flags))


@dataclass(frozen=True)
class UnitaryRepData:
    generators: tuple[np.ndarray, ...]

    def __post_init__(self):
        gens = tuple(np.asarray(g, dtype=complex) for g in self.generators)
        for k, g in enumerate(gens):
            if g.shape != (2, 2):
                raise ValueError(f"generator {k} must be 2x2, got {g.shape}")
            if np.max(np.abs(g.conj().T @ g - np.eye(2))) > UNITARY_TOL:
                raise ValueError(f"generator {k} is not unitary to {UNITARY_TOL}")
        object.__setattr__(self, "generators", gens)


@dataclass(frozen=True)
class NormalizationLog:
    tensor_degree: int
    added_points: tuple[ParabolicPoint, ...]


def par_degree(bundle: ParabolicBundle) -> Fraction:
    total = Fraction(bundle.degree)
    for p in bundle.base.points:
        for weight, mult in p.multiplicities:
            total += mult * weight
    return total


def slope(bundle: ParabolicBundle) -> Fraction:
    return par_degree(bundle) / bundle.rank


def sub_slope(bundle: ParabolicBundle, sub: SubLineData) -> Fraction:
    """Parabolic degree of a line subbundle with its induced weights."""
    known = set(bundle.base.labels)
    unknown = set(sub.flags) - known
    if unknown:
        raise ConfigurationError(f"flag choices for unknown points: {sorted(unknown)}")
    total = Fraction(sub.degree)
    for p in bundle.base.points:
        if p.is_trivial:
            total += p.alpha1
            continue
        if p.label not in sub.flags:
            raise ConfigurationError(f"missing flag choice at non-trivial point {p.label!r}")
        total += p.alpha2 if sub.flags[p.label] else p.alpha1
    return total


def stability_verdict(bundle: ParabolicBundle, candidates: Sequence[SubLineData]) -> str:
    """Verdict relative to the supplied certificates only.

    A finite list cannot prove stability against every subbundle, so
    "stable" here means "no supplied candidate destabilises".
    """
    if not candidates:
        raise ConfigurationError("stability verdict needs at least one candidate subbundle")
    mu = slope(bundle)
    slopes = [sub_slope(bundle, c) for c in candidates]
    if any(s > mu for s in slopes):
        return UNSTABLE
    if any(s == mu for s in slopes):
        return SEMISTABLE_ONLY
    return STABLE


def is_polystable_decomposable(l1: SubLineData, l2: SubLineData, base: MarkedSurface) -> bool:
    """True when E = L1 + L2 splits into lines of equal parabolic slope."""
    for p in base.points:
        if p.is_trivial:
            continue
        if p.label not in l1.flags or p.label not in l2.flags:
            raise ConfigurationError(f"missing flag choice at non-trivial point {p.label!r}")
        if l1.flags[p.label] == l2.flags[p.label]:
            raise ConfigurationError(f"flag choices at {p.label!r} are not complementary")
    bundle = ParabolicBundle(base, l1.degree + l2.degree)
    return sub_slope(bundle, l1) == sub_slope(bundle, l2)


def _fresh_label(existing: Iterable[str], stem: str = "Q") -> str:
    taken = set(existing)
    k = 1
    while f"{stem}{k}" in taken:
        k += 1
    return f"{stem}{k}"


def normalize_degree_zero(bundle: ParabolicBundle) -> tuple[ParabolicBundle, NormalizationLog]:
    """Bring the parabolic degree to zero.

    Tensor by O(d0) with d0 the largest integer keeping the parabolic
    degree <= 0, then add trivial points sharing the remaining deficit
    equally, using as few points as keep every weight below 1.
    """
    pd = par_degree(bundle)
    d0 = -math.ceil(pd / 2)
    deficit = -(pd + 2 * d0)
    added: list[ParabolicPoint] = []
    if deficit:
        count = math.floor(deficit / 2) + 1
        weight = deficit / (2 * count)
        labels = list(bundle.base.labels)
        for _ in range(count):
            lab = _fresh_label(labels)
            labels.append(lab)
            added.append(ParabolicPoint.trivial(lab, weight))
    new = ParabolicBundle(bundle.base.with_points(added), bundle.degree + 2 * d0, bundle.rank)
    return new, NormalizationLog(d0, tuple(added))


def transform_certificate(sub: SubLineData, log: NormalizationLog) -> SubLineData:
    """Image of a candidate subbundle under the normalization of its bundle."""
    return replace(sub, degree=sub.degree + log.tensor_degree)


def is_hyperbolic(surface: MarkedSurface) -> bool:
    return 2 * surface.genus - 2 + len(surface.points) > 0


def puncture_holonomy(point: ParabolicPoint) -> np.ndarray:
    phases = [np.exp(2j * np.pi * float(point.alpha1)), np.exp(2j * np.pi * float(point.alpha2))]
    return np.diag(phases)


def _is_scalar(mat: np.ndarray, tol: float) -> bool:
    return np.max(np.abs(mat - mat[0, 0] * np.eye(2))) <= tol


def is_irreducible(rep: UnitaryRepData, tol: float = INVARIANCE_TOL) -> bool:
    """True when no complex line is invariant under every generator."""
    gens = rep.generators
    first = next((g for g in gens if not _is_scalar(g, tol)), None)
    if first is None:
        return False
    _, vecs = np.linalg.eig(first)
    for k in range(2):
        v = vecs[:, k] / np.linalg.norm(vecs[:, k])
        invariant = True
        for g in gens:
            w = g @ v
            if np.linalg.norm(w - np.vdot(v, w) * v) > tol:
                invariant = False
                break
        if invariant:
            return False
    return True
