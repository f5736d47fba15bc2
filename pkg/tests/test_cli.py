import shutil
import subprocess
import sys

import pytest

from clic import io
from clic.cli import build_parser, build_run_config, main
from clic.sampler import GridRho

FAST = ["--iters", "120", "--burnin", "20", "--thin", "2"]


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        return exc.code


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    assert run("simulate", "--scenario", "two-view", "--case", "2", "--eta2", "0.45",
               "--n", "40", "--seed", "7", "--out", out) == 0
    return out


class TestSimulate:
    def test_files(self, dataset):
        for name in ("view1.csv", "view2.csv", "truth.csv", "manifest.json", "metadata.json"):
            assert (dataset / name).is_file()
        assert io.read_matrix_csv(dataset / "view1.csv").shape == (40, 1)
        header, rows = io.read_table(dataset / "truth.csv")
        assert header == ["view1", "view2"] and len(rows) == 40

    def test_same_seed_same_bytes(self, dataset, tmp_path):
        assert run("simulate", "--scenario", "two-view", "--case", "2", "--eta2", "0.45",
                   "--n", "40", "--seed", "7", "--out", tmp_path) == 0
        for name in ("view1.csv", "view2.csv", "truth.csv", "manifest.json"):
            assert (tmp_path / name).read_bytes() == (dataset / name).read_bytes()

    @pytest.mark.parametrize("scenario, extra, widths", [
        ("three-view", [], [1, 1, 1]),
        ("varying", ["--d2", "5"], [2, 5]),
        ("correlated", ["--case", "1"], [1, 1]),
    ])
    def test_scenarios(self, tmp_path, scenario, extra, widths):
        assert run("simulate", "--scenario", scenario, "--n", "30", "--seed", "1",
                   "--out", tmp_path, *extra) == 0
        for v, d in enumerate(widths, start=1):
            assert io.read_matrix_csv(tmp_path / f"view{v}.csv").shape == (30, d)

    def test_usage_errors(self, tmp_path):
        assert run("simulate", "--scenario", "two-view", "--case", "4", "--out", tmp_path) == 2
        assert run("simulate", "--scenario", "two-view", "--out", tmp_path) == 2
        assert run("simulate", "--scenario", "two-view", "--case", "1", "--eta2", "0",
                   "--out", tmp_path) == 2
        assert run("simulate", "--scenario", "nope", "--out", tmp_path) == 2


class TestFit:
    def test_outputs_and_reproducibility(self, dataset, tmp_path):
        views = [dataset / "view1.csv", dataset / "view2.csv"]
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run("fit", "--views", *views, *FAST, "--seed", "3", "--chains", "2", "--out", out) == 0
        expected = ["labels_view1.csv", "labels_view2.csv", "series.csv", "manifest.json",
                    "summary.txt", "point_estimate_view1.csv", "psm_view2.csv",
                    "k_posterior_view1.csv", "rand_hist_12.csv", "joint_k_posterior_12.csv",
                    "contingency_12.csv", "ess.csv", "metadata.json"]
        for name in expected:
            assert (a / name).is_file(), name
            if name != "metadata.json":
                assert (a / name).read_bytes() == (b / name).read_bytes(), name
        header, rows = io.read_table(a / "series.csv")
        assert header == ["iter", "rho", "rand_12", "k1", "k2", "chain"]
        assert len(rows) == 2 * 50
        assert {r[-1] for r in rows} == {"1", "2"}
        sha = io.file_sha256(a / "manifest.json")
        summary = (a / "summary.txt").read_text()
        assert f"manifest_sha256 = {sha}" in summary
        assert "rand_12_mean = " in summary and "rand_12_ci95 = [" in summary
        assert (a / "psm_view1.csv").read_text().startswith(f"# manifest_sha256={sha}")
        assert io.read_labels_csv(a / "labels_view1.csv").shape == (100, 40)

    def test_summarize_matches_fit(self, dataset, tmp_path):
        out = tmp_path / "fit"
        assert run("fit", "--views", dataset / "view1.csv", dataset / "view2.csv", *FAST,
                   "--seed", "4", "--out", out) == 0
        before = (out / "summary.txt").read_bytes()
        assert run("summarize", out) == 0
        assert (out / "summary.txt").read_bytes() == before

    def test_config_file_and_override(self, dataset, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text(
            "[sampler]\nL = 4,3\ngamma = 1\nrho = grid:0.01:150:0.5\niters = 60\nburnin = 10\n"
            "thin = 1\nseed = 11\nstandardize = false\n"
            f"[view1]\npath = {dataset / 'view1.csv'}\n[view2]\npath = {dataset / 'view2.csv'}\n")
        args = build_parser().parse_args(["fit", "--config", str(cfg), "--thin", "5", "--out", str(tmp_path / "o")])
        rc = build_run_config(args)
        assert rc.sampler.n_components == (4, 3)
        assert isinstance(rc.sampler.rho, GridRho) and rc.sampler.rho.points[0] == pytest.approx(0.01)
        assert rc.sampler.thin == 5 and rc.sampler.seed == 11
        assert rc.standardize is False
        assert run("fit", "--config", cfg, "--out", tmp_path / "o") == 0
        assert io.read_labels_csv(tmp_path / "o" / "labels_view1.csv").shape[0] == 50

    def test_correlated_model(self, tmp_path):
        data = tmp_path / "d"
        assert run("simulate", "--scenario", "correlated", "--case", "1", "--n", "30",
                   "--seed", "2", "--out", data) == 0
        assert run("fit", "--views", data / "view1.csv", data / "view2.csv", "--model", "correlated",
                   *FAST, "--seed", "1", "--out", tmp_path / "f") == 0

    def test_header_flag(self, dataset, tmp_path):
        for v in (1, 2):
            X = io.read_matrix_csv(dataset / f"view{v}.csv")
            io.write_matrix_csv(tmp_path / f"h{v}.csv", X, header=[f"x{v}"])
        assert run("fit", "--views", tmp_path / "h1.csv", tmp_path / "h2.csv", *FAST,
                   "--out", tmp_path / "f") == 1
        assert run("fit", "--views", tmp_path / "h1.csv", tmp_path / "h2.csv", "--header", *FAST,
                   "--seed", "1", "--out", tmp_path / "f") == 0


class TestFitErrors:
    def test_missing_file(self, dataset, tmp_path, capsys):
        assert run("fit", "--views", dataset / "view1.csv", tmp_path / "nope.csv", *FAST,
                   "--out", tmp_path / "o") == 1
        assert "no such file" in capsys.readouterr().err

    def test_ragged(self, dataset, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n3.0,4.0\n5.0\n")
        assert run("fit", "--views", bad, bad, *FAST, "--out", tmp_path / "o") == 1
        assert "row 3 has 1 columns" in capsys.readouterr().err

    def test_non_numeric(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0,2.0\n3.0,abc\n")
        assert run("fit", "--views", bad, bad, *FAST, "--out", tmp_path / "o") == 1
        assert "row 2, column 2" in capsys.readouterr().err

    def test_missing_value(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("1.0\nnan\n")
        assert run("fit", "--views", bad, bad, *FAST, "--out", tmp_path / "o") == 1
        assert "row 2, column 1" in capsys.readouterr().err

    def test_row_mismatch(self, dataset, tmp_path):
        short = tmp_path / "short.csv"
        short.write_text("1.0\n2.0\n")
        assert run("fit", "--views", dataset / "view1.csv", short, *FAST, "--out", tmp_path / "o") == 1

    @pytest.mark.parametrize("extra", [
        ["--rho", "beta:1"], ["--L", "5,5,5"], ["--burnin", "500"], ["--chains", "0"],
    ])
    def test_usage(self, dataset, tmp_path, extra):
        argv = ["fit", "--views", dataset / "view1.csv", dataset / "view2.csv", *FAST, *extra,
                "--out", tmp_path / "o"]
        assert run(*argv) == 2

    def test_one_view(self, dataset, tmp_path):
        assert run("fit", "--views", dataset / "view1.csv", "--out", tmp_path / "o") == 2

    def test_summarize_errors(self, tmp_path):
        assert run("summarize", tmp_path) == 1
        io.write_json(tmp_path / "manifest.json", {})
        io.write_table(tmp_path / "series.csv", ["iter", "rho", "rand_12", "k1", "k2", "chain"], [])
        assert run("summarize", tmp_path) == 1


class TestOracle:
    def test_pass_and_report(self, tmp_path):
        assert run("oracle", "--skip-geweke", "--out", tmp_path) == 0
        header, rows = io.read_table(tmp_path / "oracle_report.csv")
        assert header == ["name", "computed", "reference", "tolerance", "passed", "runtime", "detail"]
        assert all(r[4] == "1" for r in rows)
        header, rows = io.read_table(tmp_path / "eri_grid.csv")
        assert header == ["rho", "gamma1", "gamma2", "value"] and len(rows) == 9

    def test_tamper(self, tmp_path):
        assert run("oracle", "--skip-geweke", "--tamper", "--out", tmp_path) == 1


@pytest.mark.skipif(shutil.which("clic") is None, reason="console script not installed")
def test_console_script(tmp_path):
    done = subprocess.run(["clic", "simulate", "--scenario", "three-view", "--n", "10",
                           "--seed", "1", "--out", str(tmp_path)], capture_output=True, text=True)
    assert done.returncode == 0, done.stderr
    assert "seed = 1" in done.stdout
    done = subprocess.run([sys.executable, "-m", "clic.cli", "simulate", "--scenario", "bogus",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert done.returncode == 2
