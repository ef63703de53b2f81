"""Batch verification suites, JSON/CSV reports and the command line entry point."""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import cap_smoothing as cs
from . import l2_cohomology as l2
from . import model_geometry as mg
from . import parabolic_bundles as pb
from . import spectral_poincare as sp
from ._validation import ConfigurationError, as_fraction, fraction_to_str

SUITES = ("stability", "geometry", "smoothing", "spectrum", "cohomology")
PROVENANCE = ("paper", "trivial", "derived")

DEFAULT_TOLERANCES = {
    "curvature": 1e-3,
    "mean_curvature": 1e-12,
    "continuity": 1e-9,
    "holonomy": 1e-8,
    "pullback": 1e-5,
    "killing": 1e-5,
    "poincare": 1e-10,
    "refinement": 1e-3,
    "sphere": 1e-2,
    "pairing": 1e-9,
    "roundtrip": 1e-12,
    "identity": 1e-12,
}


@dataclass
class RunConfig:
    alpha1: Fraction = Fraction(0)
    alpha2: Fraction = Fraction(1, 3)
    a: float = 0.5
    c: float = 1.0
    j_values: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
    delta: float | None = None
    eps: float = 0.1
    volume_eps: float = 1e-3
    spectral_n: int = 1000
    modes: int = 3
    quadrature_order: int = 64
    samples: int = 20
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    seed: int = 20240101
    suites: tuple[str, ...] = ("all",)
    out: str = "report"
    degree_d: int = 0
    bundle: pb.ParabolicBundle | None = None
    candidates: tuple[pb.SubLineData, ...] = ()

    def __post_init__(self):
        for key, val in self.tolerances.items():
            if not val > 0:
                raise ConfigurationError(f"tolerance {key!r} must be positive")

    @property
    def end(self) -> mg.ParabolicEnd:
        return mg.ParabolicEnd(float(self.alpha1), float(self.alpha2), self.a, self.c)

    def tol(self, key: str) -> float:
        return self.tolerances[key]


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _parse_points(text: str) -> tuple[pb.ParabolicPoint, ...]:
    pts = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        label, _, weights = chunk.partition(":")
        parts = weights.split()
        if len(parts) != 2:
            raise ConfigurationError(f"point {chunk!r}: expected 'label: alpha1 alpha2'")
        pts.append(pb.ParabolicPoint(label.strip(), as_fraction(parts[0]), as_fraction(parts[1])))
    return tuple(pts)


def _parse_candidates(text: str) -> tuple[pb.SubLineData, ...]:
    out = []
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        head, *flags = chunk.split()
        fl = {}
        for item in flags:
            key, _, val = item.partition("=")
            if val.lower() not in ("true", "false"):
                raise ConfigurationError(f"flag {item!r} must be label=true or label=false")
            fl[key] = val.lower() == "true"
        out.append(pb.SubLineData(int(head), fl))
    return tuple(out)


def parse_config(text: str) -> RunConfig:
    """Build a RunConfig from INI text. Unknown sections or keys are errors."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from exc
    allowed = {
        "run": {"seed", "suites", "out"},
        "end": {"alpha1", "alpha2", "a", "c"},
        "cap": {"j", "delta", "eps", "volume_eps"},
        "grid": {"spectral_n", "modes", "quadrature_order", "samples"},
        "tolerances": set(DEFAULT_TOLERANCES),
        "bundle": {"genus", "degree", "points", "candidates"},
        "cohomology": {"d"},
    }
    for sec in parser.sections():
        if sec not in allowed:
            raise ConfigurationError(f"unknown section [{sec}]")
        extra = set(parser[sec]) - allowed[sec]
        if extra:
            raise ConfigurationError(f"unknown keys in [{sec}]: {sorted(extra)}")
    cfg = RunConfig()
    try:
        if "run" in parser:
            run = parser["run"]
            cfg.seed = run.getint("seed", cfg.seed)
            cfg.suites = tuple(run.get("suites", "all").replace(",", " ").split())
            cfg.out = run.get("out", cfg.out)
        if "end" in parser:
            e = parser["end"]
            cfg.alpha1 = as_fraction(e.get("alpha1", "0"), "alpha1")
            cfg.alpha2 = as_fraction(e.get("alpha2", "1/3"), "alpha2")
            cfg.a = e.getfloat("a", cfg.a)
            cfg.c = float(as_fraction(e.get("c", "1"), "c"))
        if "cap" in parser:
            cap = parser["cap"]
            cfg.j_values = _ints(cap.get("j", "1 2 3 4 5 6"))
            delta = cap.get("delta", "auto").strip()
            cfg.delta = None if delta == "auto" else float(delta)
            cfg.eps = cap.getfloat("eps", cfg.eps)
            cfg.volume_eps = cap.getfloat("volume_eps", cfg.volume_eps)
        if "grid" in parser:
            g = parser["grid"]
            cfg.spectral_n = g.getint("spectral_n", cfg.spectral_n)
            cfg.modes = g.getint("modes", cfg.modes)
            cfg.quadrature_order = g.getint("quadrature_order", cfg.quadrature_order)
            cfg.samples = g.getint("samples", cfg.samples)
        if "tolerances" in parser:
            for key in parser["tolerances"]:
                cfg.tolerances[key] = parser["tolerances"].getfloat(key)
        if "bundle" in parser:
            b = parser["bundle"]
            base = pb.MarkedSurface(b.getint("genus", 0), _parse_points(b.get("points", "")))
            cfg.bundle = pb.ParabolicBundle(base, b.getint("degree", 0))
            cfg.candidates = _parse_candidates(b.get("candidates", ""))
        if "cohomology" in parser:
            cfg.degree_d = parser["cohomology"].getint("d", 0)
        cfg.__post_init__()
        cfg.end  # validates the end parameters
    except ConfigurationError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(str(exc)) from exc
    if cfg.spectral_n < 200:
        raise ConfigurationError("spectral_n must be at least 200")
    for s in cfg.suites:
        if s != "all" and s not in SUITES:
            raise ConfigurationError(f"unknown suite {s!r}")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


@dataclass
class CheckResult:
    check_id: str
    computed: Any
    expected: Any
    tolerance: float
    passed: bool
    provenance: str
    anchor: str
    kind: str = "equal"  # "equal", "at_least" or "at_most"

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "computed": self.computed,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "kind": self.kind,
            "passed": self.passed,
            "provenance": self.provenance,
            "anchor": self.anchor,
        }


def check(check_id: str, computed, expected, tol: float, provenance: str, anchor: str, kind: str = "equal") -> CheckResult:
    if provenance not in PROVENANCE:
        raise ValueError(f"unknown provenance {provenance!r}")
    if isinstance(computed, (int, float)) and isinstance(expected, (int, float)) and not isinstance(computed, bool):
        computed, expected = float(computed), float(expected)
        if kind == "equal":
            ok = abs(computed - expected) <= tol
        elif kind == "at_least":
            ok = computed - expected >= -tol
        else:
            ok = expected - computed >= -tol
        ok = ok and math.isfinite(computed)
    else:
        ok = computed == expected
    return CheckResult(check_id, computed, expected, float(tol), bool(ok), provenance, anchor, kind)


# -- suites -----------------------------------------------------------------

Rows = dict[str, list[list]]
Unit = Callable[[], tuple[list[CheckResult], Rows]]


def _stability_units(cfg: RunConfig) -> list[Unit]:
    def examples():
        P = pb.ParabolicPoint("P", 0, Fraction(1, 2))
        base = pb.MarkedSurface(0, (P,))
        E = pb.ParabolicBundle(base, 0)
        out = [
            check("par_degree_example", fraction_to_str(pb.par_degree(E)), "1/2", 0, "trivial", "deg E plus weighted sum of weights"),
            check("verdict_unstable", pb.stability_verdict(E, [pb.SubLineData(0, {"P": True})]), pb.UNSTABLE, 0, "derived", "slope 1/2 exceeds 1/4"),
            check("verdict_stable", pb.stability_verdict(E, [pb.SubLineData(-1, {"P": True})]), pb.STABLE, 0, "derived", "slope -1/2 below 1/4"),
            check("hyperbolic_g0_k3", pb.is_hyperbolic(pb.MarkedSurface(0, tuple(pb.ParabolicPoint(f"P{i}") for i in range(3)))), True, 0, "paper", "2g - 2 + k > 0"),
        ]
        for pd, d0, alpha in ((Fraction(3, 2), -1, Fraction(1, 4)), (Fraction(-1, 2), 0, Fraction(1, 4))):
            # bundle with that parabolic degree: one non-trivial point carries the fraction
            pt = pb.ParabolicPoint("R", 0, pd - math.floor(pd))
            B = pb.ParabolicBundle(pb.MarkedSurface(0, (pt,)), math.floor(pd))
            B2, log = pb.normalize_degree_zero(B)
            got = [log.tensor_degree, [fraction_to_str(p.alpha1) for p in log.added_points], fraction_to_str(pb.par_degree(B2))]
            out.append(check(f"normalize_{fraction_to_str(pd)}", got, [d0, [fraction_to_str(alpha)], "0/1"], 0, "derived", "normalization to parabolic degree zero"))
        return out, {}

    def configured():
        if cfg.bundle is None or not cfg.candidates:
            return [], {}
        E = cfg.bundle
        verdict = pb.stability_verdict(E, cfg.candidates)
        E2, log = pb.normalize_degree_zero(E)
        moved = [pb.transform_certificate(c, log) for c in cfg.candidates]
        return [
            check("config_par_degree_normalized", fraction_to_str(pb.par_degree(E2)), "0/1", 0, "paper", "normalization reaches parabolic degree zero"),
            check("config_verdict_preserved", pb.stability_verdict(E2, moved), verdict, 0, "paper", "verdict unchanged by normalization"),
        ], {}

    return [examples, configured]


def _sample_points(rng, count: int) -> list[mg.EndPoint]:
    pts = []
    for _ in range(count):
        u = complex(*rng.uniform(-1.5, 1.5, 2))
        pts.append(mg.EndPoint.at(float(rng.uniform(0, 3)), float(rng.uniform(0, 2 * math.pi)), u))
    return pts


def _geometry_units(cfg: RunConfig) -> list[Unit]:
    end = cfg.end

    def scalar():
        rng = np.random.default_rng(cfg.seed)
        expected = 2 * (end.c - 1)
        rows, worst = [], None
        for p in _sample_points(rng, cfg.samples):
            s = mg.scalar_curvature_model(end, p)
            rows.append([p.t, p.theta, p.w.real, p.w.imag, p.chart, s, expected, s - expected])
            if worst is None or abs(s - expected) > abs(worst - expected):
                worst = s
        res = check("scalar_curvature_model", worst, expected, cfg.tol("curvature"), "paper", "constant scalar curvature 2(c-1)")
        return [res], {"curvature_samples": rows}

    def killing():
        rng = np.random.default_rng(cfg.seed + 1)
        worst = max(float(np.max(np.abs(mg.lie_derivative_xtheta(end, p)))) for p in _sample_points(rng, cfg.samples))
        return [check("killing_xtheta", worst, 0.0, cfg.tol("killing"), "paper", "metric invariant along X_theta", "at_most")], {}

    def pullback():
        rng = np.random.default_rng(cfg.seed + 2)
        worst = 0.0
        for _ in range(cfg.samples):
            xi = complex(rng.uniform(-6, 6), rng.uniform(end.a + 0.2, 4.0))
            ut = complex(*rng.uniform(-1.3, 1.3, 2))
            worst = max(worst, mg.pullback_metric_check(end, xi, ut))
        return [check("pullback_isometry", worst, 0.0, cfg.tol("pullback"), "paper", "cover carries the product metric", "at_most")], {}

    def holonomy():
        H = mg.chern_connection_holonomy(float(end.alpha1), float(end.alpha2))
        target = np.diag(np.exp(-2j * np.pi * np.array([float(end.alpha1), float(end.alpha2)])))
        err = float(np.max(np.abs(H - target)))
        return [check("chern_holonomy", err, 0.0, cfg.tol("holonomy"), "paper", "holonomy diag(exp(-2 pi i alpha_k))", "at_most")], {}

    def cover():
        out = []
        alpha = cfg.alpha2 - cfg.alpha1
        data = mg.qfold_cover_data(alpha)
        out.append(check("qfold_denominator", data.q, alpha.denominator, 0, "paper", "alpha = r/q in lowest terms"))
        out.append(check("qfold_fiber_monodromy", abs(data.fiber_monodromy - 1), 0.0, cfg.tol("roundtrip"), "derived", "q-th power of the deck map acts trivially", "at_most"))
        rng = np.random.default_rng(cfg.seed + 3)
        worst = 0.0
        for _ in range(cfg.samples):
            z = complex(*rng.uniform(-0.5, 0.5, 2)) + 1e-3
            t, th = mg.cusp_coordinates(z)
            worst = max(worst, abs(mg.cusp_inverse(t, th) - z))
        out.append(check("cusp_roundtrip", worst, 0.0, cfg.tol("roundtrip"), "trivial", "t = ln(-ln|z|) inverts", "at_most"))
        return out, {}

    return [scalar, killing, pullback, holonomy, cover]


def _profiles(cfg: RunConfig) -> dict[int, cs.CapProfile]:
    return {j: cs.build_cap_profile(j, cfg.delta, cfg.eps) for j in cfg.j_values}


def _smoothing_units(cfg: RunConfig) -> list[Unit]:
    end = cfg.end

    def per_profile(j: int) -> Unit:
        def run():
            p = cs.build_cap_profile(j, cfg.delta, cfg.eps)
            out = [check(f"profile_invariants_j{j}", len(p.invariant_violations()), 0, 0, "paper", "-phi'/phi nondecreasing and at least 1")]
            grid = p.validation_grid(2000)
            cusp = grid[grid <= p.cusp_end]
            h_cusp = max(abs(cs.mean_curvature(p, t) - 0.5) for t in cusp)
            out.append(check(f"mean_curvature_cusp_j{j}", h_cusp, 0.0, cfg.tol("mean_curvature"), "paper", "h = 1/2 on the cusp", "at_most"))
            term = grid[grid > p.pieces[-1].start]
            h_term = max(abs(cs.mean_curvature(p, t) - 1 / (2 * (p.T - t))) * (p.T - t) for t in term)
            out.append(check(f"mean_curvature_terminal_j{j}", h_term, 0.0, cfg.tol("mean_curvature"), "paper", "h = 1/(2(T - t)) near the tip (relative)", "at_most"))
            rng = np.random.default_rng(cfg.seed + 10 + j)
            worst = 0.0
            for region_lo, region_hi in zip([j - 0.5, *p.breakpoints], [*p.breakpoints, p.T]):
                t = float(region_lo + (region_hi - region_lo) * rng.uniform(0.1, 0.9))
                u = complex(*rng.uniform(-0.7, 0.7, 2))
                pt = mg.EndPoint(t, float(rng.uniform(0, 6)), u)
                fd = cs.cap_scalar_curvature_fd(p, end, pt)
                worst = max(worst, abs(fd - cs.cap_scalar_curvature(p, end.c, t)))
            out.append(check(f"cap_scalar_curvature_j{j}", worst, 0.0, cfg.tol("curvature"), "derived", "s = 2(c - phi''/phi) against the difference pipeline", "at_most"))
            quad, stokes = cs.chern_pairing(p), cs.chern_pairing_stokes(p)
            out.append(check(f"chern_pairing_j{j}", quad, -1.0, cfg.tol("pairing"), "derived", "pairing of the B_j curvature"))
            out.append(check(f"chern_pairing_stokes_j{j}", abs(quad - stokes), 0.0, cfg.tol("pairing"), "derived", "quadrature against Stokes", "at_most"))
            return out, {"profiles": [[j, p.delta, p.eps, p.T]]}

        return run

    def volume():
        eps = cfg.volume_eps
        K = math.log(2 * math.pi * mg.fiber_area(end.c) / eps) + 1e-9
        vols = [cs.end_volume(None, K, end.c)] + [cs.end_volume(p, min(K, p.T), end.c) for p in _profiles(cfg).values()]
        return [check("volume_control", max(vols), eps, 0.0, "paper", "uniform volume control of the ends", "at_most")], {}

    return [per_profile(j) for j in cfg.j_values] + [volume]


def _spectrum_units(cfg: RunConfig) -> list[Unit]:
    def lambdas():
        rows, vals = [], []
        out = []
        for j, p in _profiles(cfg).items():
            spectrum = sp.cap_surface_spectrum(p, cfg.modes, cfg.spectral_n)
            fine = sp.lambda1_cap_surface(p, cfg.modes, 2 * cfg.spectral_n)
            for m in spectrum.modes:
                k = 1 if m == 0 else 0
                rows.append([j, m, float(spectrum.eigenvalues[m][k])])
            vals.append(spectrum.lambda1)
            out.append(check(f"lambda1_refinement_j{j}", abs(spectrum.lambda1 - fine), 0.0, cfg.tol("refinement"), "trivial", "grid doubling", "at_most"))
        c = min(vals)
        out.insert(0, check("lambda1_uniform_lower_bound", c, 0.0, 0.0, "derived", "first eigenvalue bounded below independently of j", "at_least"))
        out.append(check("lambda1_sphere", sp.lambda1_sphere(cfg.spectral_n), 2.0, cfg.tol("sphere"), "derived", "round sphere first eigenvalue"))
        return out, {"spectra": rows}

    def gaps():
        bad = 0
        for q in range(1, 51):
            for r in range(q):
                if math.gcd(r, q) == 1 and sp.mode_gap_rational(r, q) != Fraction(1, q):
                    bad += 1
        out = [check("mode_gap_rational", bad, 0, 0, "derived", "gap 1/q for rational weight")]
        irr = (math.sqrt(2) - 1, (math.sqrt(5) - 1) / 2, math.pi - 3)
        low = min(sp.epsilon_for_K(a, K).eps for a in irr for K in range(1, 21))
        out.append(check("epsilon_irrational_positive", low, 0.0, 0.0, "paper", "almost invariant modes leave every window", "at_least"))
        r = sp.epsilon_for_K(Fraction(1, 2), 3)
        out.append(check("epsilon_rational_degenerate", [r.eps, r.degenerate], [0.0, True], 0, "trivial", "exact resonance"))
        conv = sp.cf_convergents((math.sqrt(5) - 1) / 2, 20)
        fib = [1, 1]
        while len(fib) < 23:
            fib.append(fib[-1] + fib[-2])
        ok = all(Fraction(p, q) == Fraction(fib[k + 1], fib[k + 2]) for k, (p, q) in enumerate(conv))
        out.append(check("convergents_fibonacci", ok, True, 0, "derived", "golden ratio convergents"))
        return out, {}

    def poincare():
        rng = np.random.default_rng(cfg.seed + 20)
        exp_ = (lambda t: np.exp(-t), lambda t: -np.exp(-t))
        worst = math.inf
        for h0, delta in ((0.5, 0.0), (0.5, 1.0)):
            iv = sp.WeightedInterval(0.0, 5.0, *exp_, h0, delta)
            for _ in range(100):
                f, df = sp.random_band_limited(rng, 5.0)
                worst = min(worst, sp.poincare_1d_check(iv, f, df, cfg.quadrature_order).margin)
        return [check("poincare_margin", worst, 0.0, cfg.tol("poincare"), "paper", "weighted Poincare inequality", "at_least")], {}

    return [lambdas, gaps, poincare]


def _cohomology_units(cfg: RunConfig) -> list[Unit]:
    def run():
        form = l2.IntersectionForm(cfg.degree_d)
        out = [
            check("signature", list(l2.signature(form)), [1, 1], 0, "paper", "intersection form of signature (1,1)"),
            check("h_dot_F", l2.intersect(l2.H, l2.F, form), 1.0, 0, "paper", "h.F = 1"),
            check("F_squared", l2.intersect(l2.F, l2.F, form), 0.0, 0, "paper", "F^2 = 0"),
            check("h_squared", l2.intersect(l2.H, l2.H, form), float(cfg.degree_d), 0, "paper", "h^2 = deg E"),
        ]
        rep = l2.antipodal_check(l2.antipodal_involution(cfg.degree_d), form, 1000, cfg.seed)
        out.append(check("antipodal_self_pairing", rep.max_self_pairing, 0.0, cfg.tol("identity"), "paper", "a . iota(a) = 0", "at_most"))
        out.append(check("antipodal_cone_exchange", rep.cone_exchanged, True, 0, "derived", "iota swaps positive and negative cones"))
        omega = l2.H + (1 + abs(cfg.degree_d)) * l2.F
        s = 2 * (cfg.c - 1)
        need = l2.required_pairing(s, omega, form)
        cls = l2.class_with_pairing(need, omega, form)
        ch = l2.chamber_condition(cls, omega, form)
        out.append(check("chamber_sign_matches_scalar", ch.satisfied, s < 0, 0, "paper", "chamber condition from negative scalar curvature"))
        return out, {}

    return [run]


_UNITS = {
    "stability": _stability_units,
    "geometry": _geometry_units,
    "smoothing": _smoothing_units,
    "spectrum": _spectrum_units,
    "cohomology": _cohomology_units,
}


def run_suite_with_tables(config: RunConfig, suite: str, parallel: bool = False) -> tuple[list[CheckResult], Rows]:
    if suite == "all":
        names = SUITES
    elif suite in SUITES:
        names = (suite,)
    else:
        raise ConfigurationError(f"unknown suite {suite!r}")
    results: list[CheckResult] = []
    tables: Rows = {}
    for name in names:
        units = _UNITS[name](config)
        if parallel:
            with ThreadPoolExecutor() as pool:
                outputs = list(pool.map(lambda u: u(), units))
        else:
            outputs = [u() for u in units]
        for res, rows in outputs:
            results.extend(res)
            for key, vals in rows.items():
                tables.setdefault(key, []).extend(vals)
    return results, tables


def run_suite(config: RunConfig, suite: str, parallel: bool = False) -> list[CheckResult]:
    return run_suite_with_tables(config, suite, parallel)[0]


# -- report writing ---------------------------------------------------------


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def dumps(obj) -> str:
    """Deterministic JSON with 17 significant digits for floats."""
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit_report(results: Sequence[CheckResult], path: str | Path, tables: Rows | None = None) -> None:
    """Write the JSON array of results and one CSV per table next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = "[\n" + ",\n".join("  " + dumps(r.to_dict()) for r in results) + ("\n]\n" if results else "]\n")
    path.write_text(body)
    headers = {
        "curvature_samples": ["t", "theta", "x", "y", "chart", "s_computed", "s_expected", "residual"],
        "spectra": ["j", "mode", "lambda1"],
        "profiles": ["j", "delta", "eps", "T"],
    }
    for name, rows in (tables or {}).items():
        with open(path.parent / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(headers.get(name, []))
            for row in rows:
                w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])


def dump_profiles(cfg: RunConfig, directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for j, p in _profiles(cfg).items():
        (directory / f"profile_j{j}.txt").write_text(p.to_table())


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="parabolic-ends", description="Run verification suites and write reports.")
    parser.add_argument("--config", help="INI run configuration")
    parser.add_argument("--suite", default=None, help="stability, geometry, smoothing, spectrum, cohomology or all")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--parallel", action="store_true", help="run checks within a suite concurrently")
    parser.add_argument("--dump-profile", action="store_true", help="write cap profile tables")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        suites = (args.suite,) if args.suite else cfg.suites
        for s in suites:
            if s != "all" and s not in SUITES:
                raise ConfigurationError(f"unknown suite {s!r}")
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out or cfg.out)
    results: list[CheckResult] = []
    tables: Rows = {}
    for s in suites:
        res, tab = run_suite_with_tables(cfg, s, args.parallel)
        results.extend(res)
        for k, v in tab.items():
            tables.setdefault(k, []).extend(v)
    emit_report(results, out / "report.json", tables)
    if args.dump_profile:
        dump_profiles(cfg, out / "profiles")
    failed = [r for r in results if not r.passed]
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.check_id}")
    print(f"{len(results) - len(failed)}/{len(results)} checks passed; report at {out / 'report.json'}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
