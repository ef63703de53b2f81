"""Input coercion and shared exception types."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational
from typing import Any

import numpy as np


class ConfigurationError(ValueError):
    """Raised when user-supplied data is incomplete or inconsistent."""


class ChartError(ValueError):
    """Raised when a point lies outside the chart it claims to belong to."""


class InfeasibleProfileError(ValueError):
    """Raised when a cap profile cannot meet one of its invariants."""


class HypothesisError(ValueError):
    """Raised when the hypotheses of an inequality check are not met."""


def as_fraction(value: Any, name: str = "value") -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to an exact Fraction.

    Floats are accepted only when a denominator below 10**6 reproduces
    them exactly, so 0.25 is fine but 1/sqrt(2) is rejected.
    """
    if isinstance(value, bool):
        raise TypeError(f"{name} must be rational, got bool")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError(f"{name}: cannot parse {value!r} as a rational") from exc
    if isinstance(value, (float, np.floating)):
        if not math.isfinite(value):
            raise ValueError(f"{name} must be finite")
        frac = Fraction(float(value)).limit_denominator(10**6)
        if float(frac) != float(value):
            raise ValueError(f"{name}={value!r} is not a recognisable rational")
        return frac
    raise TypeError(f"{name} must be rational, got {type(value).__name__}")


def fraction_to_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not value > 0 or not math.isfinite(value):
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_weight(value: float, name: str) -> float:
    value = float(value)
    if not 0.0 <= value < 1.0:
        raise ValueError(f"{name} must lie in [0, 1), got {value!r}")
    return value


def check_square_matrix(mat: Any, size: int, name: str = "matrix") -> np.ndarray:
    arr = np.asarray(mat)
    if arr.shape != (size, size):
        raise ValueError(f"{name} must have shape ({size}, {size}), got {arr.shape}")
    return arr


def check_rng(seed: Any) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
