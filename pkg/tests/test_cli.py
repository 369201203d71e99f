import json

import numpy as np
import pytest

from dscatter import GridSpec, load_grid, make_grid
from dscatter.cli import main


@pytest.fixture(autouse=True)
def _isolate_cwd(tmp_path, monkeypatch):
    # default manifest paths land in the CWD; keep them out of the repo
    monkeypatch.chdir(tmp_path)


def run(argv):
    return main([str(a) for a in argv])


def manifest_of(path):
    return json.loads(path.read_text())


@pytest.fixture
def qfile(tmp_path):
    path = tmp_path / "q.cgrd"
    assert run(["gen", "--kind", "gaussian", "--amp", 0.5, "--n", 32, "--L", 8,
                "--out", path]) == 0
    return path


class TestGen:
    def test_writes_expected_gaussian(self, tmp_path):
        out = tmp_path / "q.cgrd"
        assert run(["gen", "--kind", "gaussian", "--amp", 0.5, "--n", 128,
                    "--L", 8, "--out", out]) == 0
        g = load_grid(out)
        spec = GridSpec(128, 8.0)
        ref = make_grid(spec, lambda x1, x2: 0.5 * np.exp(-(x1 ** 2 + x2 ** 2)))
        assert g.spec == spec
        assert np.array_equal(g.values, ref.values)
        man = manifest_of(tmp_path / "q.cgrd.manifest.json")
        assert man["subcommand"] == "gen" and man["parameters"]["amp"] == 0.5

    def test_manifest_deterministic_modulo_wall_time(self, tmp_path):
        a, b = tmp_path / "a.cgrd", tmp_path / "b.cgrd"
        for out in (a, b):
            assert run(["gen", "--kind", "zero", "--n", 16, "--L", 2,
                        "--out", out]) == 0
        ma = manifest_of(tmp_path / "a.cgrd.manifest.json")
        mb = manifest_of(tmp_path / "b.cgrd.manifest.json")
        ma.pop("wall_time_s"), mb.pop("wall_time_s")
        assert ma == mb
        assert a.read_bytes() == b.read_bytes()


class TestFft:
    def test_roundtrip_via_files(self, tmp_path, qfile):
        fwd = tmp_path / "qhat.cgrd"
        back = tmp_path / "back.cgrd"
        assert run(["fft", "--in", qfile, "--out", fwd]) == 0
        assert run(["fft", "--in", fwd, "--out", back, "--inverse"]) == 0
        q = load_grid(qfile)
        q2 = load_grid(back)
        assert np.abs(q.values - q2.values).max() < 1e-12

    def test_csv_export(self, tmp_path, qfile):
        fwd = tmp_path / "qhat.cgrd"
        csv = tmp_path / "qhat.csv"
        assert run(["fft", "--in", qfile, "--out", fwd, "--csv", csv]) == 0
        assert csv.read_text().startswith("x1,x2,re,im\n")


class TestCauchyOps:
    def test_cauchy_of_dbar_is_identity(self, tmp_path, qfile):
        # C(dbar q) = q for the Gaussian (its Cauchy image decays fast, so
        # the composition is clean in this order; the reverse order is
        # exercised on zero-mean sources in the cauchy unit tests)
        dq = tmp_path / "dq.cgrd"
        cdq = tmp_path / "cdq.cgrd"
        assert run(["cauchy", "--in", qfile, "--out", dq, "--op", "dbar"]) == 0
        assert run(["cauchy", "--in", dq, "--out", cdq, "--op", "cauchy"]) == 0
        q = load_grid(qfile)
        got = load_grid(cdq)
        x1, x2 = q.spec.meshes()
        mask = (np.abs(x1) <= 4) & (np.abs(x2) <= 4)
        assert np.abs(got.values - q.values)[mask].max() < 1e-5


class TestNorms:
    def test_json_output(self, tmp_path, qfile, capsys):
        assert run(["norms", "--in", qfile, "--alpha", 0.5, "--beta", 0.5]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) == {"l2", "sobolev", "embedding_table"}
        assert payload["sobolev"] > payload["l2"] > 0


class TestScatterInverse:
    def test_scatter_and_inverse_files(self, tmp_path, qfile):
        r = tmp_path / "r.cgrd"
        q2 = tmp_path / "q2.cgrd"
        assert run(["scatter", "--q", qfile, "--out", r, "--kn", 32,
                    "--tol", 1e-8]) == 0
        assert run(["inverse", "--r", r, "--out", q2, "--xn", 32, "--xL", 8,
                    "--tol", 1e-8]) == 0
        q = load_grid(qfile)
        back = load_grid(q2)
        rel = np.linalg.norm(back.values - q.values) / np.linalg.norm(q.values)
        assert rel < 1e-2

    def test_threads_flag_does_not_change_output(self, tmp_path, qfile):
        outs = []
        for t in (1, 3):
            r = tmp_path / f"r{t}.cgrd"
            assert run(["scatter", "--q", qfile, "--out", r, "--kn", 16,
                        "--kL", 2, "--threads", t]) == 0
            outs.append(load_grid(r).values)
        assert np.array_equal(outs[0], outs[1])


class TestExpand:
    def test_writes_terms_and_remainder(self, tmp_path, qfile, capsys):
        prefix = tmp_path / "terms_"
        assert run(["expand", "--q", qfile, "--N", 3, "--kn", 16, "--kL", 2,
                    "--out-prefix", prefix]) == 0
        for j in range(3):
            assert (tmp_path / f"terms_{j}.cgrd").exists()
        assert (tmp_path / "remainder.cgrd").exists()
        payload = json.loads(capsys.readouterr().out)
        assert len(payload["terms"]) == 3
        assert payload["identity_defect"] < 1e-9


class TestCheck:
    def test_plancherel_passes(self, tmp_path, qfile, capsys):
        assert run(["check", "plancherel", "--q", qfile, "--kn", 32,
                    "--tol", 1e-8]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["defect"] < 1e-3
        assert payload["failed_points"] == 0

    def test_check_failure_exit_code(self, tmp_path, qfile, capsys):
        assert run(["check", "plancherel", "--q", qfile, "--kn", 16, "--kL", 2,
                    "--threshold", 1e-12, "--tol", 1e-8]) == 5

    def test_dbar_k(self, tmp_path, capsys):
        q = tmp_path / "q.cgrd"
        assert run(["gen", "--kind", "gaussian", "--amp", 0.3, "--n", 32,
                    "--L", 8, "--out", q]) == 0
        assert run(["check", "dbar-k", "--q", q, "--kn", 16, "--kL", 1]) == 0
        payload = json.loads(capsys.readouterr().out.splitlines()[-1])
        assert payload["residual"] < 5e-2


class TestMatroidCli:
    def test_pass_table(self, capsys):
        assert run(["matroid", "--family", "E2", "--N", 2]) == 0
        out = capsys.readouterr().out
        assert "pairs" in out and "FAIL" not in out

    def test_json_mode(self, capsys):
        assert run(["matroid", "--family", "E1", "--N", 3, "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["passed"] is True
        assert payload["pairs_passed"] == payload["pairs_total"]


class TestConfigAndErrors:
    def test_missing_file_is_io_error(self, tmp_path):
        assert run(["fft", "--in", tmp_path / "nope.cgrd",
                    "--out", tmp_path / "x.cgrd"]) == 3

    def test_garbage_file_is_io_error(self, tmp_path):
        bad = tmp_path / "bad.cgrd"
        bad.write_bytes(b"not a grid at all")
        assert run(["fft", "--in", bad, "--out", tmp_path / "x.cgrd"]) == 3

    def test_unknown_flag_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            run(["gen", "--frobnicate", "--n", 16, "--L", 1,
                 "--out", tmp_path / "x.cgrd"])
        assert err.value.code == 2

    def test_empty_config_means_defaults(self, tmp_path, qfile):
        cfg = tmp_path / "empty.cfg"
        cfg.write_text("# nothing here\n")
        r = tmp_path / "r.cgrd"
        assert run(["--config", cfg, "scatter", "--q", qfile, "--out", r,
                    "--kn", 16, "--kL", 2]) == 0
        man = manifest_of(tmp_path / "r.cgrd.manifest.json")
        assert man["parameters"]["tol"] == 1e-10

    def test_config_overrides_default(self, tmp_path, qfile):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("tol = 1e-12  # tighter\n")
        r = tmp_path / "r.cgrd"
        assert run(["--config", cfg, "scatter", "--q", qfile, "--out", r,
                    "--kn", 16, "--kL", 2]) == 0
        man = manifest_of(tmp_path / "r.cgrd.manifest.json")
        assert man["parameters"]["tol"] == 1e-12

    def test_flag_beats_config(self, tmp_path, qfile):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("tol = 1e-12\n")
        r = tmp_path / "r.cgrd"
        assert run(["--config", cfg, "scatter", "--q", qfile, "--out", r,
                    "--kn", 16, "--kL", 2, "--tol", 1e-8]) == 0
        man = manifest_of(tmp_path / "r.cgrd.manifest.json")
        assert man["parameters"]["tol"] == 1e-8

    def test_duplicate_config_key(self, tmp_path, qfile):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("tol = 1e-12\ntol = 1e-10\n")
        assert run(["--config", cfg, "scatter", "--q", qfile,
                    "--out", tmp_path / "r.cgrd", "--kn", 16, "--kL", 2]) == 2

    def test_unknown_config_key(self, tmp_path, qfile):
        cfg = tmp_path / "t.cfg"
        cfg.write_text("wibble = 3\n")
        assert run(["--config", cfg, "scatter", "--q", qfile,
                    "--out", tmp_path / "r.cgrd", "--kn", 16, "--kL", 2]) == 2
