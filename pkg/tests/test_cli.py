import json

import numpy as np
import pytest

from zgvscan import DimensionMismatch, NonRealEntries, ParseError, example21
from zgvscan.cli import emit_results, load_pencil, main
from zgvscan.mmio import read_matrix, write_matrix


def write_pencil_files(tmp_path, pencil):
    paths = []
    for name in ("l0", "l1", "l2", "m"):
        path = tmp_path / f"{name}.mtx"
        write_matrix(path, getattr(pencil, name))
        paths.append(str(path))
    return paths


class TestMmio:
    def test_array_roundtrip_bitexact(self, tmp_path):
        pencil = example21()
        paths = write_pencil_files(tmp_path, pencil)
        again = load_pencil(paths)
        for name in ("l0", "l1", "l2", "m"):
            assert np.array_equal(getattr(again, name), getattr(pencil, name))

    def test_coordinate_format(self, tmp_path):
        path = tmp_path / "coo.mtx"
        path.write_text(
            "%%MatrixMarket matrix coordinate real general\n"
            "% comment line\n"
            "2 2 3\n"
            "1 1 1.5\n"
            "2 1 -2.0\n"
            "2 2 4.0\n"
        )
        a = read_matrix(path)
        assert np.array_equal(a, [[1.5, 0.0], [-2.0, 4.0]])

    def test_symmetric_coordinate(self, tmp_path):
        path = tmp_path / "sym.mtx"
        path.write_text(
            "%%MatrixMarket matrix coordinate real symmetric\n"
            "2 2 3\n"
            "1 1 3.0\n"
            "2 1 1.0\n"
            "2 2 3.0\n"
        )
        a = read_matrix(path)
        assert np.array_equal(a, [[3.0, 1.0], [1.0, 3.0]])

    def test_complex_rejected(self, tmp_path):
        path = tmp_path / "cplx.mtx"
        path.write_text(
            "%%MatrixMarket matrix array complex general\n1 1\n1.0 2.0\n")
        with pytest.raises(NonRealEntries):
            read_matrix(path)

    def test_malformed_reports_line(self, tmp_path):
        path = tmp_path / "bad.mtx"
        path.write_text(
            "%%MatrixMarket matrix array real general\n2 1\n1.0\nnope\n")
        with pytest.raises(ParseError) as err:
            read_matrix(path)
        assert err.value.line == 4


class TestLoadPencil:
    def test_scalar_pencil(self, tmp_path):
        vals = {"l0": -1.0, "l1": 0.0, "l2": 1.0, "m": 1.0}
        paths = []
        for name, v in vals.items():
            path = tmp_path / f"{name}.mtx"
            path.write_text(
                f"%%MatrixMarket matrix array real general\n1 1\n{v}\n")
            paths.append(str(path))
        pencil = load_pencil(paths)
        assert pencil.n == 1
        assert pencil.l0[0, 0] == -1.0

    def test_dimension_mismatch_names_files(self, tmp_path):
        pencil = example21()
        paths = write_pencil_files(tmp_path, pencil)
        small = tmp_path / "m_small.mtx"
        write_matrix(small, np.eye(2))
        paths[3] = str(small)
        with pytest.raises(DimensionMismatch) as err:
            load_pencil(paths)
        assert "l0.mtx" in str(err.value)
        assert "m_small.mtx" in str(err.value)


class TestEmitResults:
    def test_empty_points_header_only(self, tmp_path):
        prefix = str(tmp_path / "run")
        paths = emit_results([], None, prefix)
        assert paths == [f"{prefix}_zgv.csv"]
        assert (tmp_path / "run_zgv.csv").read_text() == \
            "k,omega,classification,residual,omega_gap\n"

    def test_locale_independent_format(self, tmp_path):
        from zgvscan.refine import ZgvPoint

        pt = ZgvPoint(k=1.5, omega=12345.678, u=None, z=None,
                      residual=1e-12, classification="zgv", omega_gap=3.25)
        prefix = str(tmp_path / "fmt")
        emit_results([pt], None, prefix)
        body = (tmp_path / "fmt_zgv.csv").read_text().splitlines()[1]
        assert body == "1.5,12345.678,zgv,9.9999999999999998e-13,3.25"


class TestCliCommands:
    def test_scan_example21_end_to_end(self, tmp_path):
        prefix = str(tmp_path / "ex21")
        rc = main([
            "scan", "--model", "example21", "--k-min", "0.05", "--k-max", "2",
            "--dk", "0.1", "--num-eigs", "8", "--delta", "1e-2",
            "--out", prefix, "--no-plot",
        ])
        assert rc == 0
        rows = (tmp_path / "ex21_zgv.csv").read_text().splitlines()[1:]
        recs = [r.split(",") for r in rows]
        zgv = [r for r in recs if r[2] == "zgv"]
        assert len(zgv) == 1
        assert abs(float(zgv[0][0]) - 1.0642) <= 5e-4
        assert abs(float(zgv[0][1]) - 0.2393) <= 5e-4
        trivial = sorted(float(r[1]) for r in recs if r[2] == "trivial_zgv")
        assert len(trivial) == 3
        for got, want in zip(trivial, [0.2673, 0.4074, 1.0628]):
            assert abs(got - want) <= 5e-4
        crossings = [r for r in recs if r[2] == "crossing"]
        assert crossings
        manifest = json.loads((tmp_path / "ex21_manifest.json").read_text())
        assert manifest["command"] == "scan"
        assert manifest["config"]["delta"] == 1e-2
        assert manifest["seed"] == 20230

    def test_scan_determinism_byte_identical(self, tmp_path):
        args = ["scan", "--model", "example21", "--k-min", "0.05",
                "--k-max", "2", "--dk", "0.1", "--no-plot"]
        p1 = str(tmp_path / "run1")
        p2 = str(tmp_path / "run2")
        assert main(args + ["--out", p1]) == 0
        assert main(args + ["--out", p2]) == 0
        assert (tmp_path / "run1_zgv.csv").read_bytes() == \
            (tmp_path / "run2_zgv.csv").read_bytes()

    def test_scan_writes_report_figure(self, tmp_path):
        prefix = str(tmp_path / "fig")
        rc = main(["scan", "--model", "example21", "--k-min", "0.9",
                   "--k-max", "1.3", "--dk", "0.1", "--out", prefix])
        assert rc == 0
        assert (tmp_path / "fig_report.png").exists()
        assert (tmp_path / "fig_dispersion.csv").exists()

    def test_disperse(self, tmp_path):
        prefix = str(tmp_path / "disp")
        rc = main(["disperse", "--model", "example21", "--k-min", "0",
                   "--k-max", "2", "--k-steps", "11", "--out", prefix,
                   "--no-plot"])
        assert rc == 0
        rows = (tmp_path / "disp_dispersion.csv").read_text().splitlines()
        assert rows[0] == "k,branch,omega"
        assert len(rows) == 1 + 11 * 3
        first = rows[1].split(",")
        assert abs(float(first[2]) - 0.2673) <= 5e-5

    def test_refine(self, tmp_path):
        prefix = str(tmp_path / "ref")
        rc = main(["refine", "--model", "example21", "--k0", "1.06",
                   "--omega0", "0.24", "--out", prefix, "--no-plot"])
        assert rc == 0
        row = (tmp_path / "ref_zgv.csv").read_text().splitlines()[1].split(",")
        assert row[2] == "zgv"
        assert abs(float(row[0]) - 1.0642) <= 5e-4

    def test_oracle(self, tmp_path):
        prefix = str(tmp_path / "orc")
        rc = main(["oracle", "--model", "example21", "--k-min", "0.9",
                   "--k-max", "1.3", "--dk", "1e-3", "--out", prefix,
                   "--no-plot"])
        assert rc == 0
        rows = (tmp_path / "orc_oracle.csv").read_text().splitlines()
        assert rows[0] == "k,omega"
        assert len(rows) == 2
        k, w = map(float, rows[1].split(","))
        assert abs(k - 1.0642) <= 5e-5 and abs(w - 0.2393) <= 5e-5

    def test_matrix_file_inputs(self, tmp_path):
        paths = write_pencil_files(tmp_path, example21())
        prefix = str(tmp_path / "files")
        rc = main(["scan", "--l0", paths[0], "--l1", paths[1],
                   "--l2", paths[2], "--m", paths[3],
                   "--k-min", "0.9", "--k-max", "1.2", "--dk", "0.1",
                   "--out", prefix, "--no-plot"])
        assert rc == 0

    def test_input_error_exit_code(self, tmp_path, capsys):
        rc = main(["scan", "--model", "plate", "--k-min", "0", "--k-max", "1",
                   "--out", str(tmp_path / "x"), "--no-plot"])
        assert rc == 2
        assert "input error" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path):
        rc = main(["scan", "--l0", "/nonexistent.mtx", "--l1", "/n.mtx",
                   "--l2", "/n.mtx", "--m", "/n.mtx", "--k-min", "0",
                   "--k-max", "1", "--out", str(tmp_path / "x"), "--no-plot"])
        assert rc == 2

    def test_plate_model_from_material_file(self, tmp_path):
        mat = tmp_path / "steel.txt"
        mat.write_text("rho 7900\nct 3200\ncl 5900\nh 1.0\n")
        prefix = str(tmp_path / "plate")
        rc = main(["disperse", "--model", "plate", "--material", str(mat),
                   "--order", "6", "--polarization", "inplane",
                   "--k-min", "0.1", "--k-max", "2", "--k-steps", "5",
                   "--out", prefix, "--no-plot"])
        assert rc == 0
        rows = (tmp_path / "plate_dispersion.csv").read_text().splitlines()
        assert len(rows) == 1 + 5 * 14    # order 6 in-plane: 14 dofs
