"""Cap profiles closing the cusp, the glued metrics, and the B_j connection.

The profile phi_j equals e^-t up to j+1. There phi'' starts a linear
ramp from e^-(j+1) down to 0 over a width delta; then a parabolic well
in phi'' bends phi' to -1 over a width eps * e^-(j+1); after that
phi = T - t. Prescribing phi'' and integrating exactly gives C^2
continuity by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
import numpy as np
from scipy import integrate

from ._validation import InfeasibleProfileError, check_positive
from .curvature import MetricField, curvature_report
from .model_geometry import ParabolicEnd, _exp, fiber_area, twisted_metric

GRID_POINTS = 10_000
MAX_HALVINGS = 20


def default_delta(j: int) -> float:
    return math.exp(-j) / 10


def _horner(coeffs: Sequence[float], s):
    acc = 0 * s + coeffs[-1]
    for c in reversed(coeffs[:-1]):
        acc = acc * s + c
    return acc


def _derive(coeffs: Sequence[float]) -> tuple[float, ...]:
    if len(coeffs) == 1:
        return (0.0,)
    return tuple(k * c for k, c in enumerate(coeffs) if k > 0)


@dataclass(frozen=True)
class PolyPiece:
    """Polynomial in sigma = (t - start) / (end - start), ascending powers.

    Keeping the variable normalized keeps the coefficients of order one
    even on very short pieces.
    """

    start: float
    width: float
    coeffs: tuple[float, ...]

    @property
    def end(self) -> float:
        return self.start + self.width

    def derivative_coeffs(self, order: int) -> tuple[float, ...]:
        c = self.coeffs
        for _ in range(order):
            c = _derive(c)
        return c

    def at_sigma(self, sigma, order: int = 0):
        return _horner(self.derivative_coeffs(order), sigma) / self.width**order

    def __call__(self, t, order: int = 0):
        return self.at_sigma((t - self.start) / self.width, order)


@dataclass(frozen=True)
class CapProfile:
    j: int
    delta: float
    eps: float
    T: float
    pieces: tuple[PolyPiece, ...] = field(repr=False)

    @property
    def cusp_end(self) -> float:
        return float(self.j + 1)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return (self.cusp_end,) + tuple(p.end for p in self.pieces[:-1])

    def _piece_index(self, t) -> int:
        for k, p in enumerate(self.pieces):
            if t < p.end or k == len(self.pieces) - 1:
                return k
        return len(self.pieces) - 1

    def _eval_scalar(self, t, order: int):
        if t <= self.cusp_end:
            val = _exp(-t)
            return -val if order % 2 else val
        k = self._piece_index(t)
        if k == len(self.pieces) - 1:
            # T - t is exact in floating point here, which keeps h accurate at the tip
            return (self.T - t, -1.0, 0.0)[min(order, 2)] if order < 3 else 0.0
        return self.pieces[k](t, order)

    def evaluate(self, t, order: int = 0):
        if isinstance(t, np.ndarray):
            out = np.empty(t.shape)
            flat = t.ravel()
            res = out.ravel()
            for k, tk in enumerate(flat):
                res[k] = self._eval_scalar(float(tk), order)
            return out
        return self._eval_scalar(t, order)

    def phi(self, t):
        return self.evaluate(t, 0)

    def dphi(self, t):
        return self.evaluate(t, 1)

    def ddphi(self, t):
        return self.evaluate(t, 2)

    def region(self, t: float) -> str:
        if t <= self.cusp_end:
            return "cusp"
        return ("ramp", "well", "terminal")[self._piece_index(t)]

    def continuity_residual(self) -> float:
        """Largest jump of phi, phi', phi'' across the breakpoints."""
        worst = 0.0
        b0 = self.cusp_end
        for order in range(3):
            worst = max(worst, abs(_exp(-b0) * (-1) ** order - self.pieces[0].at_sigma(0.0, order)))
            for lp, rp in zip(self.pieces[:-1], self.pieces[1:]):
                worst = max(worst, abs(lp.at_sigma(1.0, order) - rp.at_sigma(0.0, order)))
        return worst

    def validation_grid(self, n: int = GRID_POINTS) -> np.ndarray:
        """Points on [0, T) with every piece sampled densely."""
        edges = [0.0, *self.breakpoints, self.T]
        per = n // (len(edges) - 1)
        parts = [np.linspace(a, b, per, endpoint=False) for a, b in zip(edges[:-1], edges[1:])]
        return np.concatenate(parts)

    def invariant_violations(self, n: int = GRID_POINTS) -> list[str]:
        grid = self.validation_grid(n)
        phi = self.phi(grid)
        bad = []
        if np.any(phi <= 0):
            bad.append("phi > 0 on [0, T)")
        ratio = -self.dphi(grid) / phi
        if np.min(ratio) < 1 - 1e-9:
            bad.append("-phi'/phi >= 1")
        if np.any(np.diff(ratio) < -1e-12 * np.abs(ratio[1:])):
            bad.append("-phi'/phi nondecreasing")
        if np.any(phi > np.exp(-grid) * (1 + 1e-12)):
            bad.append("phi <= e^-t")
        if self.continuity_residual() >= 1e-9:
            bad.append("C2 continuity at breakpoints")
        if abs(self.phi(self.T)) > 1e-12 or self.dphi(self.T) != -1.0:
            bad.append("phi = T - t on the terminal interval")
        return bad

    def to_table(self) -> str:
        lines = [f"# cap profile j={self.j} delta={self.delta!r} eps={self.eps!r} T={self.T!r}"]
        lines.append("kind start width coefficients")
        lines.append(f"exp 0.0 {self.cusp_end!r} e^-t")
        for name, p in zip(("ramp", "well", "terminal"), self.pieces):
            coeffs = " ".join(repr(float(c)) for c in p.coeffs)
            lines.append(f"{name} {p.start!r} {p.width!r} {coeffs}")
        return "\n".join(lines) + "\n"


def _assemble(j: int, delta: float, eps: float) -> CapProfile:
    b0 = float(j + 1)
    f0 = math.exp(-b0)
    d = delta
    # phi'' = f0 (1 - sigma)
    ramp = PolyPiece(b0, d, (f0, -f0 * d, f0 * d * d / 2, -f0 * d * d / 6))
    f1, d1 = ramp.at_sigma(1.0), ramp.at_sigma(1.0, 1)
    w = eps * f0
    k = (1 + d1) * w
    # phi'' = -6 (1 + phi'(b1)) sigma (1 - sigma) / w
    well = PolyPiece(ramp.end, w, (f1, d1 * w, 0.0, -k, k / 2))
    f2 = well.at_sigma(1.0)
    if f2 <= 0:
        raise InfeasibleProfileError(f"phi > 0 fails: phi reaches {f2:.3g} before phi' = -1 (eps too large)")
    T = well.end + f2
    terminal = PolyPiece(well.end, f2, (f2, -f2))
    return CapProfile(j, delta, eps, T, (ramp, well, terminal))


def build_cap_profile(j: int, delta: float | None = None, eps: float = 0.1) -> CapProfile:
    """Cap profile phi_j; ``eps`` is the well width in units of e^-(j+1).

    delta is halved (at most 20 times) until every invariant holds on the
    validation grid.
    """
    if int(j) != j or j < 0:
        raise ValueError(f"j must be a non-negative integer, got {j!r}")
    delta = default_delta(j) if delta is None else check_positive(delta, "delta")
    check_positive(eps, "eps")
    problems: list[str] = []
    for _ in range(MAX_HALVINGS + 1):
        profile = _assemble(int(j), delta, eps)
        problems = profile.invariant_violations()
        if not problems:
            return profile
        delta /= 2
    raise InfeasibleProfileError(f"cap profile j={j}: violated invariant(s): {', '.join(problems)}")


def _below_tip(profile: CapProfile, t: float) -> None:
    if t >= profile.T:
        raise ValueError(f"t = {t} is not below the cap endpoint T = {profile.T}")


def cap_sectional_curvature(profile: CapProfile, t: float) -> float:
    _below_tip(profile, t)
    return -profile.ddphi(t) / profile.phi(t)


def cap_scalar_curvature(profile: CapProfile, c: float, t: float) -> float:
    _below_tip(profile, t)
    return 2 * (c - profile.ddphi(t) / profile.phi(t))


def mean_curvature(profile: CapProfile, t: float) -> float:
    _below_tip(profile, t)
    return -0.5 * profile.dphi(t) / profile.phi(t)


@dataclass(frozen=True)
class CutoffFn:
    """chi(t - shift) with chi the quintic smoothstep squeezed onto [0, 1/2]."""

    shift: float
    amplitude: float = 1.0

    @classmethod
    def zero(cls, shift: float = 0.0) -> "CutoffFn":
        return cls(shift, 0.0)

    def _local(self, t):
        return min(max(2 * (t - self.shift), 0 * t), 0 * t + 1)

    def __call__(self, t):
        x = self._local(t)
        return self.amplitude * x**3 * (10 - 15 * x + 6 * x * x)

    def derivative(self, t):
        x = self._local(t)
        return self.amplitude * 2 * 30 * x * x * (1 - x) ** 2

    def second_derivative(self, t):
        x = self._local(t)
        return self.amplitude * 4 * 60 * x * (1 - x) * (1 - 2 * x)

    @property
    def max_slope(self) -> float:
        return self.amplitude * 3.75


def capped_model_field(profile: CapProfile, end: ParabolicEnd, chart: str = "u", step: float = 1e-3) -> MetricField:
    sign = 1 if chart == "u" else -1
    alpha, c = float(end.alpha), float(end.c)
    return MetricField(lambda x: twisted_metric(lambda t: profile.phi(t) ** 2, x, alpha, c, sign), step)


def fd_step(profile: CapProfile, t: float, base: float = 1e-3) -> float:
    """Difference step keeping the stencil inside one piece and fine against its width."""
    edges = [-math.inf, *profile.breakpoints, profile.T]
    for a, b in zip(edges[:-1], edges[1:]):
        if a < t < b:
            width = min(b - a, 1.0)
            return max(min(base, base * width, (t - a) / 4, (b - t) / 4), 1e-15)
    raise ValueError(f"t = {t} sits on a breakpoint or beyond the cap endpoint")


def cap_scalar_curvature_fd(profile: CapProfile, end: ParabolicEnd, point, dps: int = 40) -> float:
    """Scalar curvature of the capped 4-metric from the difference pipeline."""
    x = point.coords()
    field = capped_model_field(profile, end, point.chart)
    return curvature_report(field, x, step=fd_step(profile, x[0]), dps=dps).scalar


@dataclass(frozen=True)
class GluedMetric:
    base: MetricField
    profile: CapProfile
    cutoff: CutoffFn
    capped: MetricField

    def __call__(self, x) -> np.ndarray:
        chi = self.cutoff(x[0])
        g = (1 - chi) * self.base(x) + chi * self.capped(x)
        if not isinstance(chi, mpmath.mpf):
            np.linalg.cholesky(g)
        return g

    def field(self) -> MetricField:
        return MetricField(self, self.base.step, self.base.dim)


def glue_metric(g: MetricField, profile: CapProfile, end: ParabolicEnd, chart: str = "u") -> GluedMetric:
    """g_j = (1 - chi_j) g + chi_j g^_j with g^_j the capped model metric."""
    return GluedMetric(g, profile, CutoffFn(profile.j), capped_model_field(profile, end, chart, g.step))


def end_volume(source: CapProfile | None, t0: float, c: float) -> float:
    """Volume of {t >= t0}; ``source=None`` means the uncapped model."""
    check_positive(c, "c")
    scale = 2 * math.pi * fiber_area(c)
    if source is None:
        val, _ = integrate.quad(lambda t: math.exp(-t), t0, math.inf, epsabs=1e-15, epsrel=1e-13)
        return scale * val
    edges = sorted({t0, *[b for b in source.breakpoints if b > t0], source.T})
    edges = [e for e in edges if e >= t0 and e <= source.T]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(source.phi, a, b, epsabs=1e-15, epsrel=1e-13)
        total += val
    return scale * total


def bj_connection_form(profile: CapProfile, t: float, cutoff: CutoffFn | None = None) -> complex:
    """Coefficient of dtheta in B_j - d."""
    chi = CutoffFn(profile.j) if cutoff is None else cutoff
    return -1j * chi(t) * profile.dphi(t)


@dataclass(frozen=True)
class CurvatureSplit:
    principal: complex  # coefficient of dt ^ (phi dtheta)
    remainder: complex  # coefficient of dt ^ dtheta
    remainder_norm: float


def bj_curvature_decomposition(profile: CapProfile, t: float, cutoff: CutoffFn | None = None) -> CurvatureSplit:
    _below_tip(profile, t)
    chi = CutoffFn(profile.j) if cutoff is None else cutoff
    phi, d1, d2 = profile.phi(t), profile.dphi(t), profile.ddphi(t)
    rem = -1j * chi.derivative(t) * d1
    # |dt ^ dtheta| = 1/phi for the capped metric
    return CurvatureSplit(-1j * chi(t) * d2 / phi, rem, abs(rem) / phi)


def chern_pairing(profile: CapProfile, cutoff: CutoffFn | None = None) -> float:
    """(i / 2 pi) times the integral of F_{B_j}, by quadrature."""
    chi = CutoffFn(profile.j) if cutoff is None else cutoff

    def density(t):
        return chi.derivative(t) * profile.dphi(t) + chi(t) * profile.ddphi(t)

    knots = sorted({0.0, chi.shift, chi.shift + 0.5, *profile.breakpoints, profile.T})
    knots = [k for k in knots if 0.0 <= k <= profile.T]
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, _ = integrate.quad(density, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
    return total


def chern_pairing_stokes(profile: CapProfile, cutoff: CutoffFn | None = None) -> float:
    chi = CutoffFn(profile.j) if cutoff is None else cutoff
    return chi(profile.T) * profile.dphi(profile.T) - chi(0.0) * profile.dphi(0.0)
