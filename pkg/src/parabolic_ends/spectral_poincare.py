"""Weighted Poincare checks, slice-surface spectra and Fourier mode gaps."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._validation import HypothesisError, as_fraction, check_rng
from .cap_smoothing import CapProfile

ArrayFn = Callable[[np.ndarray], np.ndarray]

POINCARE_SLACK = 1e-10
RESONANCE_TOL = 1e-12
CAP_CELLS = 8
EIG_TOL = 1e-14


# -- weighted Poincare inequality on an interval -------------------------


@dataclass(frozen=True)
class WeightedInterval:
    t1: float
    t2: float
    phi: ArrayFn
    dphi: ArrayFn
    h0: float
    delta: float
    breakpoints: tuple[float, ...] = ()

    def mean_curvature(self, t: np.ndarray) -> np.ndarray:
        return -0.5 * self.dphi(t) / self.phi(t)

    def branch(self, samples: int = 2001) -> str:
        """Which hypothesis holds: "above" (h >= h0 > delta) or "below" (delta > h0 >= h)."""
        grid = np.unique(np.concatenate([np.linspace(self.t1, self.t2, samples), self._inner_breaks()]))
        phi = self.phi(grid)
        if np.any(phi <= 0):
            raise HypothesisError("warp must be positive on the interval")
        h = self.mean_curvature(grid)
        if np.min(h) >= self.h0 - 1e-12 and self.h0 > self.delta:
            return "above"
        if self.delta > self.h0 and np.max(h) <= self.h0 + 1e-12:
            return "below"
        raise HypothesisError(
            f"neither h >= h0 > delta nor delta > h0 >= h holds "
            f"(h in [{np.min(h):.4g}, {np.max(h):.4g}], h0={self.h0}, delta={self.delta})"
        )

    def _inner_breaks(self) -> np.ndarray:
        return np.array([b for b in self.breakpoints if self.t1 < b < self.t2], dtype=float)


def gauss_panels(edges: Sequence[float], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights over consecutive edges."""
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        half = (b - a) / 2
        nodes.append(a + half * (x + 1))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class PoincareResult:
    lhs: float
    rhs: float
    margin: float
    holds: bool
    branch: str


def poincare_1d_check(
    interval: WeightedInterval, f: ArrayFn, df: ArrayFn, n: int = 64, panels: int = 32
) -> PoincareResult:
    """Compare both sides of the weighted inequality for one test function.

    lhs = int |e^{dt} f'|^2 phi,
    rhs = (h0-d)^2 int |f e^{dt}|^2 phi + (h0-d) [|f e^{dt}|^2 phi]_{t1}^{t2}.
    """
    branch = interval.branch()
    iv = interval
    base = np.linspace(iv.t1, iv.t2, panels + 1)
    edges = np.unique(np.concatenate([base, iv._inner_breaks()]))
    t, w = gauss_panels(edges, n)
    phi = iv.phi(t)
    ew = np.exp(2 * iv.delta * t)
    lhs = float(np.sum(w * ew * np.abs(df(t)) ** 2 * phi))
    k = iv.h0 - iv.delta
    ends = np.array([iv.t1, iv.t2])
    boundary = np.abs(f(ends)) ** 2 * np.exp(2 * iv.delta * ends) * iv.phi(ends)
    rhs = float(k * k * np.sum(w * ew * np.abs(f(t)) ** 2 * phi) + k * (boundary[1] - boundary[0]))
    margin = lhs - rhs
    return PoincareResult(lhs, rhs, margin, margin >= -POINCARE_SLACK, branch)


def random_band_limited(rng, length: float, terms: int = 6, offset: float = 0.0) -> tuple[ArrayFn, ArrayFn]:
    """Random trigonometric polynomial on an interval and its derivative."""
    a = rng.normal(size=terms + 1)
    b = rng.normal(size=terms + 1)
    omega = np.arange(terms + 1) * math.pi / length

    def f(t):
        s = np.asarray(t, dtype=float)[..., None] - offset
        return np.sum(a * np.cos(omega * s) + b * np.sin(omega * s), axis=-1)

    def df(t):
        s = np.asarray(t, dtype=float)[..., None] - offset
        return np.sum(omega * (-a * np.sin(omega * s) + b * np.cos(omega * s)), axis=-1)

    return f, df


# -- Laplacian on a surface of revolution --------------------------------


@dataclass
class DiscreteSpectrum:
    """Per-mode finite-volume operators on a t-grid and their low eigenvalues."""

    edges: np.ndarray
    modes: tuple[int, ...]
    stiffness: dict[int, tuple[np.ndarray, np.ndarray]] = field(repr=False)
    mass: np.ndarray = field(repr=False)
    eigenvalues: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def lambda1(self) -> float:
        cands = [self.eigenvalues[0][1]] + [self.eigenvalues[m][0] for m in self.modes if m > 0]
        return float(min(cands))


def surface_spectrum(phi: ArrayFn, edges: np.ndarray, modes: Sequence[int], count: int = 3) -> DiscreteSpectrum:
    """Low spectrum of -phi^-1 (phi f')' + m^2 phi^-2 f on each mode m.

    Cell-centred finite volumes: no flux through the first edge (Neumann,
    or automatic when phi vanishes there) and the flux through the last
    edge carries phi at that edge, which is zero at a smooth tip.
    """
    edges = np.asarray(edges, dtype=float)
    centres = (edges[:-1] + edges[1:]) / 2
    width = np.diff(edges)
    phic = phi(centres)
    if np.any(phic <= 0):
        raise ValueError("warp must be positive at every cell centre")
    mass = phic * width
    flux = phi(edges[1:-1]) / np.diff(centres)
    diag0 = np.zeros_like(centres)
    diag0[:-1] += flux
    diag0[1:] += flux
    off = -flux
    stiff: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    eig: dict[int, np.ndarray] = {}
    scale = 1 / np.sqrt(mass)
    for m in modes:
        diag = diag0 + m * m * width / phic
        stiff[m] = (diag, off)
        d = diag * scale * scale
        e = off * scale[:-1] * scale[1:]
        # bisection with an absolute tolerance: the default relative one
        # loses the zero mode once the cap cells make the operator stiff
        vals = eigh_tridiagonal(
            d, e, eigvals_only=True, select="i", select_range=(0, count - 1),
            lapack_driver="stebz", tol=EIG_TOL,
        )
        eig[m] = np.sort(vals)
    return DiscreteSpectrum(edges, tuple(modes), stiff, mass, eig)


def cap_grid(profile: CapProfile, n: int) -> np.ndarray:
    """n uniform cells on the cusp part plus a few cells per cap piece.

    The cap carries a negligible share of the area; resolving it finely
    only inflates the condition number of the scaled operator.
    """
    if n < 200:
        raise ValueError("grid size must be at least 200")
    parts = [np.linspace(0.0, profile.cusp_end, n + 1)]
    per = CAP_CELLS
    for p in profile.pieces:
        parts.append(np.linspace(p.start, p.end, per + 1)[1:])
    edges = np.concatenate(parts)
    edges[-1] = profile.T
    return edges


def cap_surface_spectrum(profile: CapProfile, m: int = 3, n: int = 1000) -> DiscreteSpectrum:
    return surface_spectrum(profile.phi, cap_grid(profile, n), range(m + 1))


def lambda1_cap_surface(profile: CapProfile, m: int = 3, n: int = 1000) -> float:
    """First nonzero eigenvalue of dt^2 + phi^2 dtheta^2 on [0, T] x S^1."""
    return cap_surface_spectrum(profile, m, n).lambda1


def lambda1_sphere(n: int = 1000, m: int = 3) -> float:
    """Sanity case: the unit round sphere, warp sin t on [0, pi]."""
    edges = np.linspace(0.0, math.pi, n + 1)
    return surface_spectrum(np.sin, edges, range(m + 1)).lambda1


# -- Fourier modes along the X_theta orbits ------------------------------


@dataclass(frozen=True)
class FourierMode:
    k: int
    l: int


@dataclass(frozen=True)
class ModeLattice:
    alpha: float
    K: int
    eps: float

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be non-negative")
        if self.K < 1:
            raise ValueError("K must be positive")

    def almost_invariant(self) -> list[FourierMode]:
        """Modes of the window with |k + alpha l|^2 <= eps."""
        out = []
        for k in range(-self.K, self.K + 1):
            for l in range(-self.K, self.K + 1):
                if (k + self.alpha * l) ** 2 <= self.eps:
                    out.append(FourierMode(k, l))
        return out


def xtheta_mode_action(mode: FourierMode, alpha) -> complex:
    return 1j * (mode.k + alpha * mode.l)


def mode_gap_bruteforce(alpha: Fraction, window: int) -> Fraction:
    """min |k + alpha l| over the window, resonant modes excluded.

    With alpha = r/q this is min |k q + r l| / q over integers, which
    keeps the search exact and vectorized.
    """
    alpha = as_fraction(alpha, "alpha")
    r, q = alpha.numerator, alpha.denominator
    span = np.arange(-window, window + 1, dtype=np.int64)
    vals = np.abs(span[:, None] * q + span[None, :] * r)
    vals = vals[vals != 0]
    if vals.size == 0:
        return None
    return Fraction(int(vals.min()), q)


def mode_gap_rational(r: int, q: int, check: bool = True) -> Fraction:
    """Smallest non-zero |k + (r/q) l|, which is 1/q."""
    if q < 1 or math.gcd(r, q) != 1:
        raise ValueError(f"need q >= 1 and gcd(r, q) = 1, got r={r}, q={q}")
    gap = Fraction(1, q)
    if check:
        brute = mode_gap_bruteforce(Fraction(r, q), 2 * q)
        if brute != gap:
            raise ArithmeticError(f"brute-force gap {brute} disagrees with 1/{q}")
    return gap


@dataclass(frozen=True)
class EpsilonResult:
    eps: float
    degenerate: bool
    argmin: FourierMode


def epsilon_for_K(alpha, K: int) -> EpsilonResult:
    """min |k + alpha l|^2 over (k, l) != 0 in the window |k|, |l| <= K.

    ``degenerate`` flags an exact (or round-off level) resonance inside
    the window, which happens for rational alpha with small denominator.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    exact = isinstance(alpha, Fraction)
    best, arg = None, None
    for l in range(-K, K + 1):
        for k in range(-K, K + 1):
            if k == 0 and l == 0:
                continue
            v = (k + alpha * l) ** 2
            if best is None or v < best:
                best, arg = v, FourierMode(k, l)
    if exact:
        return EpsilonResult(float(best), best == 0, arg)
    degenerate = best <= RESONANCE_TOL**2
    return EpsilonResult(0.0 if degenerate else float(best), degenerate, arg)


def cf_convergents(alpha, n: int) -> list[tuple[int, int]]:
    """Continued-fraction convergents r/q of alpha in (0, 1), skipping q = 1.

    Floats are expanded exactly from their binary value, so the expansion
    terminates and every convergent obeys |alpha - r/q| <= 1/q^2 exactly.
    """
    x = Fraction(alpha) if not isinstance(alpha, Fraction) else alpha
    if not 0 < x < 1:
        raise ValueError("alpha must lie in (0, 1)")
    p_prev, p = 0, 1
    q_prev, q = 1, 0
    out: list[tuple[int, int]] = []
    rest = x
    while len(out) < n:
        a = math.floor(rest)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
        if q > 1:
            out.append((p, q))
        frac = rest - a
        if frac == 0:
            break
        rest = 1 / frac
    return out


@dataclass(frozen=True)
class ModeInequalityReport:
    bound: Fraction
    ratios: tuple[float, ...]
    min_ratio: float
    holds: bool
    rejected: int


def _resonant(mode: tuple[int, int], alpha: Fraction) -> bool:
    return mode[0] + alpha * mode[1] == 0


def mode_ratio(coeffs: Mapping[tuple[int, int], complex], alpha: Fraction) -> float:
    """|X_theta f|^2 / |f|^2 for a trigonometric polynomial given by its coefficients."""
    num = sum(abs(c) ** 2 * float(k + alpha * l) ** 2 for (k, l), c in coeffs.items())
    den = sum(abs(c) ** 2 for c in coeffs.values())
    return num / den


def mode_inequality_check(
    r: int,
    q: int,
    samples: int = 50,
    seed=0,
    window: int | None = None,
    polynomials: Sequence[Mapping[tuple[int, int], complex]] | None = None,
) -> ModeInequalityReport:
    """Check |X_theta f|^2 >= |f|^2 / q^2 on mean-zero trigonometric polynomials.

    Random polynomials have their resonant coefficients removed. Supplied
    polynomials carrying any resonant coefficient are rejected.
    """
    alpha = Fraction(r, q)
    gap = mode_gap_rational(r, q, check=False)
    rng = check_rng(seed)
    win = 2 * q + 2 if window is None else window
    polys: list[dict] = []
    rejected = 0
    for poly in polynomials or ():
        if any(c != 0 and _resonant(m, alpha) for m, c in poly.items()) or not any(poly.values()):
            rejected += 1
        else:
            polys.append(dict(poly))
    modes = [(k, l) for k in range(-win, win + 1) for l in range(-win, win + 1) if not _resonant((k, l), alpha)]
    for _ in range(samples):
        size = int(rng.integers(1, 8))
        pick = rng.choice(len(modes), size=size, replace=False)
        vals = rng.normal(size=size) + 1j * rng.normal(size=size)
        polys.append({modes[i]: v for i, v in zip(pick, vals)})
    ratios = tuple(mode_ratio(p, alpha) for p in polys)
    bound = gap * gap
    low = min(ratios) if ratios else math.inf
    return ModeInequalityReport(bound, ratios, low, low >= float(bound) * (1 - 1e-12), rejected)
