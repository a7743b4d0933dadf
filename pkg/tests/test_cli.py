import json

import numpy as np
import pytest

from vilenkin.cli import main
from vilenkin.group import WALSH
from vilenkin.transform import (
    grid_function,
    read_grid_csv,
    read_spectral_csv,
    write_grid_csv,
)


def run(argv):
    return main([str(a) for a in argv])


class TestDirichletCommand:
    def test_block_kernel_example(self, tmp_path, capsys):
        # D_8 = D_{M_3}: 8 on I_3, 0 elsewhere
        assert run(["dirichlet", "--m", "2^", "--n", 8, "--N", 4, "--out", tmp_path]) == 0
        out = capsys.readouterr().out
        assert "closed-vs-direct" in out and "block-kernel identity" in out
        path = tmp_path / "dirichlet_m2c_n8.csv"
        lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
        rows = [l.split(",") for l in lines[1:]]
        values = {int(r[0]): float(r[1]) for r in rows}
        for i in range(16):
            assert values[i] == pytest.approx(8.0 if i % 8 == 0 else 0.0, abs=1e-9)

    def test_config_header_embedded(self, tmp_path):
        run(["dirichlet", "--m", "2^", "--n", 4, "--N", 4, "--out", tmp_path])
        text = (tmp_path / "dirichlet_m2c_n4.csv").read_text()
        assert text.startswith("# vilenkin-config: command=dirichlet m=2^ N=4")


class TestLebesgueCommand:
    def test_emits_511_rows(self, tmp_path, capsys):
        assert run(["lebesgue", "--m", "2^", "--N", 9, "--out", tmp_path]) == 0
        assert "511 rows" in capsys.readouterr().out
        body = (tmp_path / "lebesgue_m2c_N9.csv").read_text()
        data_rows = [l for l in body.splitlines() if l and l[0].isdigit()]
        assert len(data_rows) == 511

    def test_explicit_convention(self, tmp_path, capsys):
        assert run(["lebesgue", "--m", "2^", "--N", 6, "--convention", "from0", "--out", tmp_path]) == 0
        assert "from0" in capsys.readouterr().out


class TestTransformCommand:
    def test_forward_inverse_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        f = grid_function(WALSH, 4, rng.standard_normal(16))
        src = tmp_path / "f.csv"
        with src.open("w") as fh:
            write_grid_csv(fh, f)
        spec_path = tmp_path / "fhat.csv"
        assert run(
            ["transform", "--m", "2^", "--N", 4, "--op", "forward", "--input", src, "--output", spec_path]
        ) == 0
        with spec_path.open() as fh:
            sv = read_spectral_csv(fh)
        back_path = tmp_path / "back.csv"
        assert run(
            ["transform", "--m", "2^", "--N", 4, "--op", "inverse", "--input", spec_path, "--output", back_path]
        ) == 0
        with back_path.open() as fh:
            back = read_grid_csv(fh)
        assert np.abs(back.values - f.values).max() < 1e-9
        assert sv.size == 16

    def test_binary_output(self, tmp_path):
        rng = np.random.default_rng(1)
        f = grid_function(WALSH, 3, rng.standard_normal(8))
        src = tmp_path / "f.csv"
        with src.open("w") as fh:
            write_grid_csv(fh, f)
        out = tmp_path / "fhat.bin"
        assert run(["transform", "--m", "2^", "--N", 3, "--op", "forward", "--input", src, "--output", out]) == 0
        assert out.read_bytes()[:4] == b"VGF1"

    def test_wrong_kind_is_usage_error(self, tmp_path, capsys):
        rng = np.random.default_rng(2)
        f = grid_function(WALSH, 3, rng.standard_normal(8))
        src = tmp_path / "f.csv"
        with src.open("w") as fh:
            write_grid_csv(fh, f)
        code = run(["transform", "--m", "2^", "--N", 3, "--op", "inverse", "--input", src, "--output", tmp_path / "x.csv"])
        assert code == 2
        assert "error:" in capsys.readouterr().err


class TestAtomCommand:
    def test_generate_and_validate(self, tmp_path, capsys):
        assert run(["atom", "--m", "2^", "--p", 0.5, "--rank", 2, "--N", 6, "--out", tmp_path]) == 0
        atom_file = tmp_path / "atom_p0.5_rank2.csv"
        assert atom_file.exists()
        # strip the config header, then validate through the CLI
        body = "\n".join(atom_file.read_text().splitlines()[1:]) + "\n"
        clean = tmp_path / "clean.csv"
        clean.write_text(body)
        assert run(["atom", "--m", "2^", "--p", 0.5, "--rank", 2, "--N", 6, "--validate", clean]) == 0
        assert "valid p-atom" in capsys.readouterr().out


class TestCounterexampleCommand:
    def test_emits_spec_and_coefficients(self, tmp_path, capsys):
        assert run(["counterexample", "--m", "2^", "--p", 0.5, "--N", 10, "--out", tmp_path]) == 0
        blob = json.loads((tmp_path / "counterexample_p0.5_N10.json").read_text())
        assert blob["alphas"] == [3, 5, 17, 257]
        coeff_rows = [
            l for l in (tmp_path / "counterexample_p0.5_N10_coefficients.csv").read_text().splitlines()
            if l and l[0].isdigit()
        ]
        assert len(coeff_rows) == 1024
        # block [2,4) carries lambda_0 M_1 / lambda = 2^(-1/2) * 2 / 2
        j, re, im = coeff_rows[2].split(",")
        assert float(re) == pytest.approx(2**-0.5)
        assert "budget" in capsys.readouterr().out


class TestScanCommand:
    def test_supp_scan_writes_artifacts(self, tmp_path):
        assert run(["scan", "--name", "supp_measure", "--m", "2^", "--N", 7, "--out", tmp_path, "--svg"]) == 0
        stem = tmp_path / "scan_supp_measure_m2c_N7"
        assert stem.with_suffix(".json").exists()
        assert stem.with_suffix(".csv").exists()
        assert stem.with_suffix(".svg").read_text().startswith("<svg")

    def test_violated_verdict_exit_code(self, tmp_path):
        # radix-4 sequences break the kernel floor: exit 1, evidence on disk
        code = run(["scan", "--name", "dirichlet_floor", "--m", "2,3,4^", "--N", 5, "--out", tmp_path])
        assert code == 1
        blob = json.loads((tmp_path / "scan_dirichlet_floor_m2_3_4c_N5.json").read_text())
        assert blob["verdict"] == "violated"

    def test_unknown_scan_is_usage_error(self, tmp_path, capsys):
        assert run(["scan", "--name", "nope", "--m", "2^", "--N", 5, "--out", tmp_path]) == 2
        assert "unknown scan" in capsys.readouterr().err

    def test_divergence_scan_cli(self, tmp_path, capsys):
        assert run(["scan", "--name", "divergence", "--m", "2^", "--N", 12, "--p", 0.5,
                    "--variant", "Mn_plus_1", "--out", tmp_path]) == 0
        assert "verdict growing" in capsys.readouterr().out


class TestConfigPlumbing:
    def test_config_file_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m=3^\nN=5\n")
        assert run(["lebesgue", "--config", cfg, "--out", tmp_path]) == 0
        assert (tmp_path / "lebesgue_m3c_N5.csv").exists()

    def test_cli_flag_beats_config(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("m=3^\nN=5\n")
        assert run(["lebesgue", "--config", cfg, "--m", "2^", "--N", 6, "--out", tmp_path]) == 0
        assert (tmp_path / "lebesgue_m2c_N6.csv").exists()

    def test_malformed_config_rejected(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just some words\n")
        assert run(["lebesgue", "--config", cfg, "--out", tmp_path]) == 2

    def test_outdir_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("VILENKIN_OUTDIR", str(tmp_path / "envdir"))
        assert run(["dirichlet", "--m", "2^", "--n", 2, "--N", 3]) == 0
        assert (tmp_path / "envdir" / "dirichlet_m2c_n2.csv").exists()

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as err:
            run(["dirichlet", "--m", "2^", "--N", 4])  # missing --n
        assert err.value.code == 2


class TestSelftest:
    def test_selftest_passes(self, capsys):
        assert run(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "all selftest checks passed" in out
        assert out.count("PASS") >= 15


class TestArtifactReproducibility:
    def test_same_config_same_bytes(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            run(["scan", "--name", "atom_ratio", "--m", "2^", "--N", 6, "--p", 0.5,
                 "--trials", 10, "--out", out])
        name = "scan_atom_ratio_m2c_N6"
        for suffix in (".json", ".csv"):
            assert (a / name).with_suffix(suffix).read_bytes() == (b / name).with_suffix(suffix).read_bytes()
