import csv
import json
import math

import pytest

from parabolic_ends import cli_report as cli
from parabolic_ends._validation import ConfigurationError

SMALL = """
[run]
seed = 7
suites = all

[end]
alpha1 = 0
alpha2 = 1/3
a = 0.5          ; start of the end, in units of t
c = 1            ; fiber curvature

[cap]
j = 1, 2
delta = auto
eps = 0.1

[grid]
spectral_n = 200
modes = 2
quadrature_order = 32
samples = 4

[bundle]
genus = 0
degree = 0
points = P: 0 1/2
candidates = 0 P=true; -1 P=true

[cohomology]
d = 0
"""


@pytest.fixture(scope="module")
def cfg():
    return cli.parse_config(SMALL)


def by_id(results):
    return {r.check_id: r for r in results}


class TestConfig:
    def test_parse(self, cfg):
        assert cfg.j_values == (1, 2)
        assert cfg.alpha2 == cli.Fraction(1, 3)
        assert cfg.bundle.base.points[0].alpha2 == cli.Fraction(1, 2)
        assert cfg.candidates[1].degree == -1

    @pytest.mark.parametrize("text", [
        "[run]\nseed = x\n",
        "[nope]\nk = 1\n",
        "[end]\nbeta = 1\n",
        "[tolerances]\ncurvature = -1\n",
        "[run]\nsuites = sideways\n",
        "[grid]\nspectral_n = 10\n",
        "no header",
        "[bundle]\npoints = P: 1/2\n",
    ])
    def test_errors(self, text):
        with pytest.raises(ConfigurationError):
            cli.parse_config(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            cli.load_config(tmp_path / "none.ini")


class TestChecks:
    def test_check_kinds(self):
        assert cli.check("a", 1.0, 1.5, 0.5, "trivial", "x").passed
        assert not cli.check("a", 1.0, 1.5, 0.4, "trivial", "x").passed
        assert cli.check("b", -1e-11, 0.0, 1e-10, "paper", "x", "at_least").passed
        assert not cli.check("b", 2.0, 1.0, 0.5, "paper", "x", "at_most").passed
        assert not cli.check("c", math.nan, 0.0, 1.0, "paper", "x").passed
        assert cli.check("d", [1, 1], [1, 1], 0, "paper", "x").passed
        with pytest.raises(ValueError):
            cli.check("e", 0, 0, 0, "folklore", "x")

    def test_geometry_suite(self, cfg):
        res = by_id(cli.run_suite(cfg, "geometry"))
        s = res["scalar_curvature_model"]
        assert s.expected == 0.0 and s.passed and s.provenance == "paper"
        assert all(r.passed for r in res.values())

    def test_cohomology_suite(self, cfg):
        res = by_id(cli.run_suite(cfg, "cohomology"))
        assert res["signature"].expected == [1, 1] and res["signature"].passed

    def test_stability_suite(self, cfg):
        res = cli.run_suite(cfg, "stability")
        assert all(r.passed for r in res)
        assert "config_verdict_preserved" in by_id(res)

    def test_unknown_suite(self, cfg):
        with pytest.raises(ConfigurationError):
            cli.run_suite(cfg, "sideways")

    def test_parallel_matches_sequential(self, cfg):
        a = cli.run_suite(cfg, "smoothing")
        b = cli.run_suite(cfg, "smoothing", parallel=True)
        assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


class TestReport:
    def test_empty(self, tmp_path):
        cli.emit_report([], tmp_path / "r.json")
        assert json.loads((tmp_path / "r.json").read_text()) == []

    def test_roundtrip(self, tmp_path, cfg):
        res = cli.run_suite(cfg, "cohomology") + [cli.check("tiny", 1 / 3, 0.1 + 0.2, 1e-300, "derived", "x")]
        cli.emit_report(res, tmp_path / "r.json")
        back = json.loads((tmp_path / "r.json").read_text())
        assert back == [r.to_dict() for r in res]
        assert list(back[0]) == ["check_id", "computed", "expected", "tolerance", "kind", "passed", "provenance", "anchor"]

    def test_dumps_formats(self):
        assert cli.dumps(0.1) == "0.10000000000000001"
        assert cli.dumps({"b": [1, True, None]}) == '{"b": [1, true, null]}'
        assert cli.dumps(math.inf) == '"inf"'
        with pytest.raises(TypeError):
            cli.dumps(object())

    def test_csv_companions(self, tmp_path):
        cli.emit_report([], tmp_path / "r.json", {"spectra": [[1, 0, 2.5]]})
        rows = list(csv.reader(open(tmp_path / "spectra.csv")))
        assert rows == [["j", "mode", "lambda1"], ["1", "0", "2.5"]]


class TestMain:
    def write(self, tmp_path, text=SMALL):
        p = tmp_path / "run.ini"
        p.write_text(text)
        return str(p)

    def test_exit_codes(self, tmp_path):
        conf = self.write(tmp_path)
        assert cli.main(["--config", conf, "--suite", "cohomology", "--out", str(tmp_path / "o")]) == 0
        assert cli.main(["--config", conf, "--suite", "sideways", "--out", str(tmp_path / "o")]) == 2
        assert cli.main(["--config", str(tmp_path / "missing.ini")]) == 2
        assert cli.main(["--bogus-flag"]) == 2
        strict = self.write(tmp_path, SMALL + "\n[tolerances]\npullback = 1e-300\n")
        assert cli.main(["--config", strict, "--suite", "geometry", "--out", str(tmp_path / "b")]) == 1

    def test_byte_identical(self, tmp_path):
        conf = self.write(tmp_path)
        outs = []
        for k, extra in enumerate(([], ["--parallel"])):
            out = tmp_path / f"o{k}"
            cli.main(["--config", conf, "--suite", "geometry", "--out", str(out), *extra])
            outs.append(((out / "report.json").read_bytes(), (out / "curvature_samples.csv").read_bytes()))
        assert outs[0] == outs[1]

    def test_dump_profile(self, tmp_path):
        conf = self.write(tmp_path)
        out = tmp_path / "o"
        assert cli.main(["--config", conf, "--suite", "stability", "--out", str(out), "--dump-profile"]) == 0
        text = (out / "profiles" / "profile_j2.txt").read_text()
        assert text.startswith("# cap profile j=2")
