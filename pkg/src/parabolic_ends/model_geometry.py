"""The model metric on a parabolic end and checks built on it.

Real coordinates are (t, theta, x, y) with w = x + i y the fiber
coordinate. In the ``"u"`` chart w = u; in the ``"v"`` chart w = 1/u and
the twist changes sign.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from ._validation import ChartError, as_fraction, check_positive, check_weight
from .curvature import MetricField, curvature_report, lie_derivative_metric

CHART_LIMIT = 2.0


@dataclass(frozen=True)
class ParabolicEnd:
    alpha1: float = 0.0
    alpha2: float = 0.0
    a: float = 0.5
    c: float = 1.0

    def __post_init__(self):
        check_weight(self.alpha1, "alpha1")
        check_weight(self.alpha2, "alpha2")
        if float(self.alpha1) > float(self.alpha2):
            raise ValueError("need alpha1 <= alpha2")
        check_positive(self.a, "a")
        check_positive(self.c, "c")

    @property
    def alpha(self):
        return self.alpha2 - self.alpha1


@dataclass(frozen=True)
class EndPoint:
    t: float
    theta: float
    w: complex = 0j
    chart: str = "u"

    def __post_init__(self):
        if self.chart not in ("u", "v"):
            raise ChartError(f"unknown chart {self.chart!r}")
        if abs(self.w) > CHART_LIMIT:
            raise ChartError(f"|w| = {abs(self.w):.3g} too far from the {self.chart!r} chart")

    @classmethod
    def at(cls, t: float, theta: float, u: complex) -> "EndPoint":
        """Point with fiber coordinate u, switching chart for |u| > 1."""
        if abs(u) > 1:
            return cls(t, theta, 1 / u, "v")
        return cls(t, theta, complex(u), "u")

    @property
    def u(self) -> complex:
        if self.chart == "u":
            return complex(self.w)
        if self.w == 0:
            return complex("inf")
        return 1 / self.w

    def coords(self) -> np.ndarray:
        return np.array([self.t, self.theta, self.w.real, self.w.imag])


def _exp(x):
    return mpmath.exp(x) if isinstance(x, mpmath.mpf) else math.exp(x)


def _zeros(x) -> np.ndarray:
    if isinstance(x, mpmath.mpf):
        return np.full((4, 4), mpmath.mpf(0), dtype=object)
    return np.zeros((4, 4))


def twisted_metric(warp2, x, alpha: float, c: float, sign: int = 1) -> np.ndarray:
    """dt^2 + warp2(t) dtheta^2 + (4/c)(1+|w|^2)^-2 |dw - i s alpha w dtheta|^2.

    ``sign`` is +1 in the u chart and -1 in the v chart.
    """
    t, _, p, q = x[0], x[1], x[2], x[3]
    r2 = p * p + q * q
    A = 4 / (c * (1 + r2) ** 2)
    tw = sign * alpha
    g = _zeros(t)
    g[0, 0] = 1 + 0 * t
    g[1, 1] = warp2(t) + A * alpha * alpha * r2
    g[1, 2] = g[2, 1] = A * tw * q
    g[1, 3] = g[3, 1] = -A * tw * p
    g[2, 2] = g[3, 3] = A
    return g


def model_field(end: ParabolicEnd, chart: str = "u", step: float = 1e-3) -> MetricField:
    sign = 1 if chart == "u" else -1
    alpha, c = float(end.alpha), float(end.c)
    return MetricField(lambda x: twisted_metric(lambda t: _exp(-2 * t), x, alpha, c, sign), step)


def model_metric_at(end: ParabolicEnd, point: EndPoint) -> np.ndarray:
    return model_field(end, point.chart)(point.coords())


def fiber_area(c: float) -> float:
    """Area of the fiber sphere of curvature c."""
    return 4 * math.pi / c


def scalar_curvature_model(end: ParabolicEnd, point: EndPoint, step: float = 1e-3) -> float:
    return curvature_report(model_field(end, point.chart, step), point.coords()).scalar


def mean_curvature_slice(phi: Callable[[float], float], dphi: Callable[[float], float], t: float) -> float:
    """h = -phi'/(2 phi), the fiber volume being constant in t."""
    val = phi(t)
    if val <= 0:
        raise ValueError(f"warp must be positive, phi({t}) = {val}")
    return -0.5 * dphi(t) / val


def xtheta_at(end: ParabolicEnd, point: EndPoint) -> np.ndarray:
    sign = 1 if point.chart == "u" else -1
    a = sign * float(end.alpha)
    return np.array([0.0, 1.0, -a * point.w.imag, a * point.w.real])


def xtheta_field(end: ParabolicEnd, chart: str = "u") -> Callable[[np.ndarray], np.ndarray]:
    a = float(end.alpha) * (1 if chart == "u" else -1)
    return lambda x: np.array([0.0, 1.0, -a * x[3], a * x[2]])


def lie_derivative_xtheta(end: ParabolicEnd, point: EndPoint, step: float = 1e-3) -> np.ndarray:
    field = model_field(end, point.chart, step)
    return lie_derivative_metric(field, xtheta_field(end, point.chart), point.coords(), step)


def kahler_form_model(end: ParabolicEnd, x, chart: str = "u") -> np.ndarray:
    """Antisymmetric matrix of the Kahler form e^-t dt^dtheta + fiber area form."""
    sign = 1 if chart == "u" else -1
    t, _, p, q = x
    A = 4 / (float(end.c) * (1 + p * p + q * q) ** 2)
    tw = sign * float(end.alpha)
    om = np.zeros((4, 4))
    om[0, 1] = math.exp(-t)
    # A (dx + tw q dtheta) ^ (dy - tw p dtheta)
    om[2, 3] = A
    om[2, 1] = -A * tw * p
    om[1, 3] = A * tw * q
    return om - om.T


def closedness_residual(end: ParabolicEnd, point: EndPoint, step: float = 1e-4) -> float:
    """max |d omega| by central differences."""
    x = point.coords()
    d = np.empty((4, 4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = step
        d[k] = (kahler_form_model(end, x + e, point.chart) - kahler_form_model(end, x - e, point.chart)) / (2 * step)
    cyc = d + np.einsum("jki->ijk", d) + np.einsum("kij->ijk", d)
    return float(np.max(np.abs(cyc)))


def covering_map(end: ParabolicEnd, xi: complex, u_tilde: complex) -> tuple[complex, complex]:
    """(xi, u~) -> (e^{i xi}, e^{i alpha Re xi} u~) in the chart v~ = 1."""
    if xi.imag <= end.a:
        raise ValueError(f"need Im xi > a = {end.a}, got {xi.imag}")
    return cmath.exp(1j * xi), cmath.exp(1j * float(end.alpha) * xi.real) * u_tilde


def deck_transform(end: ParabolicEnd, xi: complex, u_tilde: complex) -> tuple[complex, complex]:
    return xi + 2 * math.pi, cmath.exp(-2j * math.pi * float(end.alpha)) * u_tilde


def cusp_coordinates(z: complex, a: float | None = None) -> tuple[float, float]:
    r = abs(z)
    bound = 1.0 if a is None else math.exp(-a)
    if not 0 < r < bound:
        raise ValueError(f"|z| = {r} outside (0, {bound})")
    return math.log(-math.log(r)), cmath.phase(z)


def cusp_inverse(t: float, theta: float) -> complex:
    return cmath.exp(-math.exp(t)) * cmath.exp(1j * theta)


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def _end_coords(end: ParabolicEnd, xi: complex, ut: complex, chart: str) -> np.ndarray:
    z, u = covering_map(end, xi, ut)
    t, theta = cusp_coordinates(z)
    w = u if chart == "u" else 1 / u
    return np.array([t, theta, w.real, w.imag])


def pullback_metric_check(end: ParabolicEnd, xi: complex, u_tilde: complex, step: float = 1e-4) -> float:
    """Max-entry deviation of p*g from the product metric on the cover.

    The cover carries |d xi|^2 / (Im xi)^2 plus the fiber metric of
    curvature c in the coordinate u~.
    """
    chart = "u" if abs(u_tilde) <= 1 else "v"
    src = np.array([xi.real, xi.imag, u_tilde.real, u_tilde.imag])

    def f(s):
        return _end_coords(end, complex(s[0], s[1]), complex(s[2], s[3]), chart)

    def jacobian(h):
        J = np.empty((4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            diff = f(src + e) - f(src - e)
            diff[1] = _wrap(diff[1])
            J[:, k] = diff / (2 * h)
        return J

    base = f(src)
    # one Richardson step on the central differences
    J = (4 * jacobian(step / 2) - jacobian(step)) / 3
    g = model_field(end, chart)(base)
    pulled = J.T @ g @ J
    target = np.zeros((4, 4))
    target[0, 0] = target[1, 1] = 1 / xi.imag**2
    target[2, 2] = target[3, 3] = 4 / (end.c * (1 + abs(u_tilde) ** 2) ** 2)
    return float(np.max(np.abs(pulled - target)))


@dataclass(frozen=True)
class QFoldCover:
    r: int
    q: int
    deck_rotation: complex
    fiber_monodromy: complex
    composite_residual: float


def qfold_cover_data(alpha, samples: int = 16, seed: int = 0) -> QFoldCover:
    """Factorization of the end through the q-fold cover for alpha = r/q.

    ``composite_residual`` is the largest gap between pi o p, pi_1 and
    pi^q o p~ on random points of the half-plane.
    """
    try:
        frac = as_fraction(alpha, "alpha")
    except (TypeError, ValueError) as exc:
        raise ValueError("alpha must be rational for a finite cover") from exc
    if not 0 <= frac < 1:
        raise ValueError(f"alpha must lie in [0, 1), got {frac}")
    r, q = frac.numerator, frac.denominator
    rng = np.random.default_rng(seed)
    worst = 0.0
    end = ParabolicEnd(0.0, float(frac))
    for _ in range(samples):
        xi = complex(rng.uniform(-10, 10), rng.uniform(0.6, 3.0))
        z, _ = covering_map(end, xi, 0.3 + 0.1j)
        z1 = cmath.exp(1j * xi)
        zq = cmath.exp(1j * xi / q) ** q
        worst = max(worst, abs(z - z1), abs(z1 - zq))
    return QFoldCover(
        r=r,
        q=q,
        deck_rotation=cmath.exp(2j * math.pi / q),
        fiber_monodromy=cmath.exp(-2j * math.pi * float(frac) * q),
        composite_residual=worst,
    )


def _rk4_transport(conn: Callable[[float], np.ndarray], steps: int) -> np.ndarray:
    """Solve s' = -A(theta) s on [0, 2 pi] from the identity."""
    h = 2 * math.pi / steps
    s = np.eye(conn(0.0).shape[0], dtype=complex)
    th = 0.0
    for _ in range(steps):
        k1 = -conn(th) @ s
        k2 = -conn(th + h / 2) @ (s + h / 2 * k1)
        k3 = -conn(th + h / 2) @ (s + h / 2 * k2)
        k4 = -conn(th + h) @ (s + h * k3)
        s = s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        th += h
    return s


def chern_connection_holonomy(alpha1: float, alpha2: float, radius: float = 0.3, steps: int = 1024) -> np.ndarray:
    """Parallel transport of d + diag(alpha1, alpha2) dz/z once around |z| = radius."""
    if steps < 64:
        raise ValueError("steps must be at least 64")
    if not 0 < radius < 1:
        raise ValueError("radius must lie in (0, 1)")
    weights = np.diag([alpha1, alpha2]).astype(complex)

    def conn(th):
        z = radius * cmath.exp(1j * th)
        dz = 1j * z
        return weights * (dz / z)

    return _rk4_transport(conn, steps)
