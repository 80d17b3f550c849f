import hashlib
import os

import pytest

from primstab import charlab, formats
from primstab import words as W
from primstab.cli import main
from primstab.errors import DomainError


class TestConfig:
    def test_defaults_match_modules(self):
        from primstab import defaults
        cfg = formats.Config()
        assert cfg.ball_radius == defaults.BALL_RADIUS_CAP
        assert cfg.max_len_certify == defaults.MAX_LEN_CERTIFY
        assert cfg.max_len_scan == defaults.MAX_LEN_SCAN
        assert cfg.conjugator_depth == defaults.CONJUGATOR_DEPTH
        assert cfg.tol_class == defaults.DEFAULT_SETTINGS.class_tol
        assert cfg.gap_c == defaults.DEFAULT_SETTINGS.gap_c
        assert cfg.tol_fingerprint == defaults.DEFAULT_SETTINGS.fingerprint_tol
        assert cfg.threads == defaults.THREADS

    def test_parse(self):
        cfg = formats.parse_config("gap_c = 0.5\n# comment\nthreads=4\n")
        assert cfg.gap_c == 0.5 and cfg.threads == 4

    def test_unknown_key(self):
        with pytest.raises(DomainError):
            formats.parse_config("nonsense = 1\n")

    def test_bad_value(self):
        with pytest.raises(DomainError):
            formats.parse_config("threads = many\n")


class TestRepresentationFile:
    def test_roundtrip(self):
        rep = charlab.anchor_representation()
        text = formats.write_representation(rep)
        back = formats.parse_representation(text)
        assert back.presentation == rep.presentation
        for m1, m2 in zip(rep.matrices, back.matrices):
            assert m1.equals(m2, tol=1e-11)
        assert back.residual < 1e-9

    def test_missing_generator(self):
        with pytest.raises(DomainError):
            formats.parse_representation("presentation free2\ngen a 1 0 0 0 0 0 1 0\n")

    def test_unknown_directive(self):
        with pytest.raises(DomainError):
            formats.parse_representation("presentation free2\nbogus\n")


class TestAutomorphismFile:
    def test_shipped_nonorientable(self):
        autos = formats.load_shipped_automorphisms(W.nonorientable_surface(3))
        assert [f.name for f in autos] == ["twist_ab", "twist_bc", "cycle_abc",
                                           "reverse"]

    def test_shipped_free2(self):
        autos = formats.load_shipped_automorphisms(W.free_group(2))
        assert [f.name for f in autos] == ["nielsen_ab", "nielsen_ba"]

    def test_invalid_rejected(self):
        bad = ("gens a b\n"
               "auto broken: a -> a a ; b -> b\n"
               "inverse: a -> a ; b -> b\n")
        with pytest.raises(DomainError):
            formats.parse_automorphisms(bad)

    def test_missing_inverse_block(self):
        with pytest.raises(DomainError):
            formats.parse_automorphisms("gens a b\nauto f: a -> a b ; b -> b\n")


class TestCsv:
    def test_empty_table(self):
        assert formats.write_csv(["x", "y"], []) == "x,y\n"

    def test_one_row(self):
        out = formats.write_csv(["x"], [[1.5]])
        assert out == "x\n1.5\n"

    def test_quoting(self):
        out = formats.write_csv(["a"], [['with,comma'], ['with"quote']])
        assert out.splitlines() == ["a", '"with,comma"', '"with""quote"']

    def test_float_17_digits(self):
        out = formats.write_csv(["v"], [[1.0 / 3.0]])
        assert out.splitlines()[1] == "0.33333333333333331"

    def test_byte_identical(self):
        rows = [[0.1 * k, "w%d" % k, None] for k in range(20)]
        a = formats.write_csv(["x", "w", "m"], rows)
        b = formats.write_csv(["x", "w", "m"], rows)
        assert hashlib.sha256(a.encode()).digest() == hashlib.sha256(b.encode()).digest()


class TestPpm:
    def test_single_certified_cell(self):
        out = formats.write_ppm([["certified"]])
        assert out.splitlines() == ["P3", "1 1", "255", "30 160 70"]

    def test_two_by_two_row_major(self):
        grid = [["certified", "failed"], ["inconclusive", "error"]]
        out = formats.write_ppm(grid)
        body = out.splitlines()[3:]
        # top row of the image is the last grid row
        assert body == ["250 180 20", "60 60 60", "30 160 70", "200 30 30"]

    def test_roundtrip(self):
        grid = [["certified", "failed"], ["inconclusive", "error"]]
        out = formats.write_ppm(grid)
        pixels = formats.parse_ppm(out)
        flat = [pix for row in pixels for pix in row]
        names = []
        rev = {v: k for k, v in formats.VERDICT_PALETTE.items()}
        for pix in flat:
            names.append(rev[pix])
        assert names == ["inconclusive", "error", "certified", "failed"]

    def test_dimension_cap(self):
        with pytest.raises(DomainError):
            formats.write_ppm([["certified"] * 5000])


class TestCli:
    def test_selftest(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "all suites passed" in out

    def test_unknown_flag_usage_error(self):
        assert main(["certify", "--bogus"]) == 2

    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == 2

    def test_missing_rep_is_domain_error(self, capsys):
        assert main(["certify"]) == 1
        assert capsys.readouterr().err.startswith("error:")

    def test_certify_anchor_stdout(self, capsys):
        rc = main(["certify", "--family", "nec3", "--max-len", "3",
                   "--depth", "4"])
        assert rc == 0
        out = capsys.readouterr().out
        lines = out.splitlines()
        assert lines[0] == "word,length,stride,min_gap,verdict"
        assert lines[-1].startswith("(summary)")
        assert lines[-1].endswith("certified")

    def test_certify_rep_file(self, tmp_path, capsys):
        rep = charlab.anchor_representation()
        path = tmp_path / "anchor.txt"
        path.write_text(formats.write_representation(rep))
        rc = main(["certify", "--rep", str(path), "--max-len", "2",
                   "--depth", "3"])
        assert rc == 0
        assert "certified" in capsys.readouterr().out

    def test_primitives_csv(self, capsys):
        rc = main(["primitives", "--presentation", "free2", "--max-len", "2"])
        assert rc == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == "canonical_word,length,orientation,verdict_depth"
        assert len(out.splitlines()) == 5

    def test_parabolics_empty_at_anchor(self, capsys):
        rc = main(["parabolics", "--family", "nec3", "--max-len", "2",
                   "--depth", "3"])
        assert rc == 0
        assert capsys.readouterr().out == "word,orientation\n"

    def test_orbit_report(self, capsys):
        rc = main(["orbit", "--family", "nec3", "--depth", "2"])
        assert rc == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "depth,applied,distinct_characters,in_window,window_bound"

    def test_scan_writes_files(self, tmp_path):
        cfgfile = tmp_path / "cfg.txt"
        cfgfile.write_text(
            "grid_re_min = 2.8\ngrid_re_max = 3.2\n"
            "grid_im_min = -0.1\ngrid_im_max = 0.1\n"
            "grid_nx = 2\ngrid_ny = 2\n")
        csv_path = tmp_path / "scan.csv"
        ppm_path = tmp_path / "scan.ppm"
        rc = main(["--config", str(cfgfile), "scan", "--max-len", "2",
                   "--depth", "3", "--out-csv", str(csv_path),
                   "--out-ppm", str(ppm_path)])
        assert rc == 0
        csv_text = csv_path.read_text()
        assert csv_text.splitlines()[0].startswith("cell_i,cell_j,p_re,p_im")
        assert len(csv_text.splitlines()) == 5
        grid = formats.parse_ppm(ppm_path.read_text())
        assert len(grid) == 2 and len(grid[0]) == 2
