import csv
import math

import numpy as np
import pytest

from imexssp.cli import main


def run_csv(tmp_path, args, name="out.csv"):
    out = tmp_path / name
    code = main(args + ["--out", str(out)])
    assert code == 0
    with open(out) as fh:
        return list(csv.DictReader(fh)), out.read_bytes()


class TestRegions:
    def test_ssp3_real_extent(self, tmp_path):
        rows, _ = run_csv(tmp_path, ["regions", "--scheme", "ssp3", "--n-theta", "512"])
        re = np.array([float(r["re"]) for r in rows if r["is_pole"] == "0"])
        assert re.min() == pytest.approx(-4.0 / 3.0, abs=1e-4)
        assert re.max() <= 1e-10

    def test_deterministic_output(self, tmp_path):
        _, first = run_csv(tmp_path, ["regions", "--scheme", "ssp4", "--n-theta", "256"], "a.csv")
        _, second = run_csv(tmp_path, ["regions", "--scheme", "ssp4", "--n-theta", "256"], "b.csv")
        assert first == second

    def test_phi_family_right_half_plane(self, tmp_path):
        rows, _ = run_csv(tmp_path, [
            "regions", "--scheme", "imex-biased-k3", "--phi-family",
            "--n-theta", "512", "--n-lambda", "128", "--family-size", "8",
        ])
        re = np.array([float(r["re"]) for r in rows if r["is_pole"] == "0"])
        assert re.min() >= -1e-10

    def test_implicit_centred_wedge_visible(self, tmp_path):
        rows, _ = run_csv(tmp_path, [
            "regions", "--scheme", "implicit-centred-k3", "--beta", "0",
            "--n-theta", "1024",
        ])
        pts = np.array([complex(float(r["re"]), float(r["im"]))
                        for r in rows if r["is_pole"] == "0"])
        constraining = pts[pts.real < -1e-9]
        angle = np.arctan2(np.abs(constraining.imag), -constraining.real).min()
        assert angle == pytest.approx(math.atan(2.0), abs=1e-3)

    def test_restricted_curve(self, tmp_path):
        rows, _ = run_csv(tmp_path, [
            "regions", "--scheme", "ssp3", "--nu", "0.333333", "--n-theta", "512",
        ])
        im = np.array([float(r["im"]) for r in rows if r["is_pole"] == "0"])
        assert np.abs(im).max() <= 0.333333 + 1e-9

    def test_svg_output(self, tmp_path):
        out = tmp_path / "region.svg"
        code = main(["regions", "--scheme", "ssp3", "--n-theta", "256",
                     "--format", "svg", "--out", str(out)])
        assert code == 0
        text = out.read_text()
        assert text.startswith("<svg")
        assert "polyline" in text

    def test_svg_phi_family(self, tmp_path):
        out = tmp_path / "family.svg"
        code = main(["regions", "--scheme", "imex-biased-k3", "--phi-family",
                     "--n-theta", "256", "--n-lambda", "64", "--family-size", "4",
                     "--format", "svg", "--out", str(out)])
        assert code == 0
        assert out.read_text().count("polyline") >= 4

    def test_kind_override(self, tmp_path):
        rows, _ = run_csv(tmp_path, [
            "regions", "--scheme", "imex-biased-k3", "--kind", "implicit",
            "--n-theta", "256",
        ])
        # implicit locus of the biased scheme reaches 4 at theta = -pi
        first = rows[0]
        assert float(first["re"]) == pytest.approx(4.0, abs=1e-6)

    def test_unknown_scheme_exit_code(self, capsys):
        assert main(["regions", "--scheme", "rk4"]) == 2
        assert "unknown scheme id" in capsys.readouterr().err


class TestAngles:
    def test_table_contents(self, tmp_path):
        rows, _ = run_csv(tmp_path, ["angles", "--n-lambda", "256", "--n-theta", "1024"])
        assert len(rows) == 8
        by_scheme = {(r["scheme"], r["params"]): r for r in rows}
        biased3 = by_scheme[("imex-biased-k3", "")]
        assert float(biased3["alpha_measured"]) == pytest.approx(math.pi / 2, abs=1e-6)
        centred3 = by_scheme[("imex-centred-k3", "beta=0 nu=1/3")]
        assert float(centred3["alpha_closed_form"]) == pytest.approx(math.pi / 4, abs=1e-12)
        assert float(by_scheme[("mcnab", "c=0.0")]["alpha_measured"]) < 0.02

    def test_json_format(self, tmp_path):
        import json
        out = tmp_path / "angles.json"
        code = main(["angles", "--n-lambda", "128", "--n-theta", "512",
                     "--format", "json", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload) == 8
        assert {"scheme", "params", "alpha_measured", "alpha_closed_form",
                "alpha_reference"} <= set(payload[0])


class TestVerify:
    def test_only_filter_passes(self, capsys):
        code = main(["verify", "--only", "centred-angle"])
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS centred-angle-closed-form" in out

    def test_k4_wedge_reports_tan(self, capsys):
        code = main(["verify", "--only", "k4-wedge"])
        out = capsys.readouterr().out
        assert code == 0
        assert "tan = 0.89" in out

    def test_unknown_filter(self, capsys):
        assert main(["verify", "--only", "nonexistent"]) == 2

    def test_tolerance_scale_env(self, monkeypatch, capsys):
        # a huge tolerance scale turns the known-red table criterion green,
        # demonstrating the debugging hook end to end
        monkeypatch.setenv("IMEXSSP_TOL_SCALE", "1e6")
        assert main(["verify", "--only", "angle-table"]) == 0
        monkeypatch.delenv("IMEXSSP_TOL_SCALE")
        assert main(["verify", "--only", "angle-table"]) == 1
        capsys.readouterr()

    def test_exit_nonzero_when_a_criterion_fails(self, monkeypatch, capsys):
        from imexssp import verify as verify_module
        from imexssp.verify import CheckResult

        monkeypatch.setattr(verify_module, "CRITERIA", {
            "negative-control": lambda scale=1.0: CheckResult(
                "negative-control", False, "injected failure"),
        })
        assert main(["verify"]) == 1
        out = capsys.readouterr().out
        assert "FAIL negative-control" in out
        assert "0/1 criteria passed" in out


class TestConverge:
    def test_mcnab_second_order(self, tmp_path):
        rows, _ = run_csv(tmp_path, ["converge", "--scheme", "mcnab"])
        orders = {float(r["fitted_order"]) for r in rows}
        assert len(orders) == 1
        assert orders.pop() == pytest.approx(2.0, abs=0.1)

    def test_euler_baseline_first_order(self, tmp_path):
        rows, _ = run_csv(tmp_path, ["converge", "--scheme", "euler"])
        assert float(rows[0]["fitted_order"]) == pytest.approx(1.0, abs=0.1)

    def test_advdiff_problem(self, tmp_path):
        rows, _ = run_csv(tmp_path, [
            "converge", "--scheme", "imex-biased-k3", "--problem", "advdiff",
            "--cells", "32", "--dt", "0.025", "--t-end", "0.2", "--levels", "3",
        ])
        assert float(rows[0]["fitted_order"]) == pytest.approx(2.0, abs=0.25)

    def test_advdiff_explicit_scheme_defaults(self, tmp_path):
        # default dt follows the grid's Courant step, keeping ssp3 stable
        rows, _ = run_csv(tmp_path, [
            "converge", "--scheme", "ssp3", "--problem", "advdiff",
            "--cells", "32", "--levels", "3",
        ])
        assert float(rows[0]["fitted_order"]) == pytest.approx(2.0, abs=0.2)

    def test_blow_up_reported_cleanly(self, capsys):
        code = main(["converge", "--problem", "advdiff", "--scheme", "ssp3",
                     "--cells", "32", "--dt", "0.1"])
        assert code == 2
        assert "blow-up detected" in capsys.readouterr().err


class TestTvd:
    def test_ssp3_at_half_courant(self, tmp_path, capsys):
        rows, _ = run_csv(tmp_path, ["tvd", "--scheme", "ssp3", "--sigma", "0.5",
                                     "--cells", "128", "--steps", "100"])
        growth = [float(r["tv_growth"]) for r in rows if r["tv_growth"]]
        assert max(growth) <= 1e-12
        assert len(rows) == 101

    def test_ssp4_at_two_thirds(self, tmp_path):
        rows, _ = run_csv(tmp_path, ["tvd", "--scheme", "ssp4",
                                     "--sigma", "0.666666666666666666",
                                     "--cells", "128", "--steps", "100"])
        growth = [float(r["tv_growth"]) for r in rows if r["tv_growth"]]
        assert max(growth) <= 1e-12

    def test_beyond_cfl_reports_growth(self, tmp_path):
        rows, _ = run_csv(tmp_path, ["tvd", "--scheme", "ssp3", "--sigma", "0.95",
                                     "--cells", "64", "--steps", "60"])
        growth = [float(r["tv_growth"]) for r in rows if r["tv_growth"]]
        assert max(growth) > 0.0

    def test_staircase_seeded(self, tmp_path):
        _, first = run_csv(tmp_path, ["tvd", "--data", "staircase", "--seed", "7",
                                      "--cells", "128", "--steps", "20"], "a.csv")
        _, second = run_csv(tmp_path, ["tvd", "--data", "staircase", "--seed", "7",
                                       "--cells", "128", "--steps", "20"], "b.csv")
        assert first == second
