"""Sweep configs, CSV emission, determinism, and figure reproduction."""

import math
import os

import numpy as np
import pytest

from mirrorqed import errors, sweeps

MIRROR_HEADER = (
    "d_over_lambda0,k0d,re_r,ratio_closed,ratio_quadrature,"
    "abs_diff,err_estimate,method,status"
)
CAVITY_HEADER = (
    "k0d,r_mir,ratio_quadrature,ratio_series,ratio_limit_2nd,"
    "err_estimate,status,method"
)
LINDBLAD_HEADER = "t,pop_jc,pop_single_rate,pop_jump_mean,pop_jump_stderr,method,status"


def read_csv(path):
    """Split a sweep CSV into (preamble_text, header, rows-of-strings)."""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    preamble = [line[2:] for line in lines if line.startswith("# ")]
    body = [line for line in lines if not line.startswith("# ")]
    return "\n".join(preamble), body[0], [line.split(",") for line in body[1:]]


class TestRange:
    def test_parse_three_and_four_parts(self):
        assert sweeps.Range.parse("0:2:5") == sweeps.Range(0.0, 2.0, 5)
        assert sweeps.Range.parse("0.1:10:50:log") == sweeps.Range(
            0.1, 10.0, 50, "log"
        )

    def test_dump_round_trip(self):
        for rng in [sweeps.Range(0.0, 3.0, 31), sweeps.Range(1e-4, 0.3, 200, "log")]:
            assert sweeps.Range.parse(rng.dump()) == rng

    def test_values(self):
        np.testing.assert_allclose(
            sweeps.Range(0.0, 1.0, 5).values(), [0.0, 0.25, 0.5, 0.75, 1.0]
        )
        vals = sweeps.Range(0.1, 10.0, 3, "log").values()
        np.testing.assert_allclose(vals, [0.1, 1.0, 10.0], rtol=1e-12)

    @pytest.mark.parametrize(
        "text",
        ["1:2", "1:2:3:4:5", "a:2:3", "0:2:1", "2:1:5", "0:1:5:log", "1:2:3:cubic"],
    )
    def test_rejects_malformed(self, text):
        with pytest.raises(errors.ConfigError):
            sweeps.Range.parse(text)


class TestSweepConfig:
    def test_defaults_validate(self):
        cfg = sweeps.SweepConfig(target="cavity")
        cfg.validate()

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(target="nonsense"),
            dict(target="mirror", method="series"),
            dict(target="cavity", figure="mirror_dielectric"),
            dict(target="figure", figure="not_a_figure"),
            dict(target="cavity", k0d=1.0, d_over_lambda0=0.5),
            dict(target="cavity", r=sweeps.Range(0, 0.5, 3), k0d=sweeps.Range(1, 2, 3)),
            dict(target="cavity", t=sweeps.Range(0, 3, 5)),
            dict(target="lindblad", t=sweeps.Range(-1.0, 3.0, 5)),
            dict(target="cavity", max_evals=100),
            dict(target="cavity", tol=0.0),
            dict(target="lindblad", n_traj=0),
        ],
    )
    def test_validate_rejects(self, kwargs):
        with pytest.raises(errors.ConfigError):
            sweeps.SweepConfig(**kwargs).validate()

    def test_dump_parse_round_trip(self):
        configs = [
            sweeps.SweepConfig(target="mirror", r=-1.0,
                               d_over_lambda0=sweeps.Range(0.01, 3.0, 101)),
            sweeps.SweepConfig(target="cavity", r=0.8,
                               k0d=sweeps.Range(0.1, 10.0, 50, "log"), tol=1e-10),
            sweeps.SweepConfig(target="lindblad", t=sweeps.Range(0.0, 3.0, 31),
                               g=2.0, gamma_cav=1.5, dt=1e-3, n_traj=77),
            sweeps.SweepConfig(target="figure", figure="mirror_plasmonic",
                               quick=True),
        ]
        for cfg in configs:
            text = sweeps.dump_config(cfg)
            again = sweeps.config_from_items(sweeps.parse_config_items(text))
            assert again == cfg

    def test_parse_skips_comments_and_blanks(self):
        items = sweeps.parse_config_items(
            "# leading comment\n\ntarget = cavity  # trailing\nr = 0.5\n"
        )
        assert items == {"target": "cavity", "r": 0.5}

    def test_parse_rejects_unknown_key(self):
        with pytest.raises(errors.ConfigError, match="unknown config key"):
            sweeps.parse_config_items("target = cavity\nbogus = 1\n")

    def test_parse_rejects_bare_line(self):
        with pytest.raises(errors.ConfigError, match="key = value"):
            sweeps.parse_config_items("just some words\n")

    def test_config_requires_target(self):
        with pytest.raises(errors.ConfigError, match="target"):
            sweeps.config_from_items({"r": 0.5})


class TestRateSweeps:
    def test_mirror_single_row(self, tmp_path):
        out = str(tmp_path / "m.csv")
        cfg = sweeps.SweepConfig(target="mirror", r=-1.0, d_over_lambda0=0.25,
                                 out=out)
        assert sweeps.run_sweep(cfg) == 0
        preamble, header, rows = read_csv(out)
        assert header == MIRROR_HEADER
        assert len(rows) == 1
        row = dict(zip(header.split(","), rows[0]))
        assert float(row["d_over_lambda0"]) == 0.25
        assert float(row["k0d"]) == pytest.approx(math.pi / 2, rel=1e-15)
        assert float(row["ratio_closed"]) == pytest.approx(1.1519817754635067, abs=1e-12)
        assert float(row["ratio_quadrature"]) == pytest.approx(
            1.1519817754635067, abs=1e-9
        )
        assert float(row["abs_diff"]) <= float(row["err_estimate"])
        assert row["status"] == "ok"
        # the preamble is the canonical config dump
        assert sweeps.config_from_items(sweeps.parse_config_items(preamble)) == cfg

    def test_cavity_single_row_all_methods(self, tmp_path):
        out = str(tmp_path / "c.csv")
        cfg = sweeps.SweepConfig(target="cavity", r=0.9, k0d=1e-3, out=out)
        assert sweeps.run_sweep(cfg) == 0
        _, header, rows = read_csv(out)
        assert header == CAVITY_HEADER
        row = dict(zip(header.split(","), rows[0]))
        assert float(row["ratio_quadrature"]) == pytest.approx(
            18.999316039608285, rel=1e-9
        )
        assert float(row["ratio_series"]) == pytest.approx(18.999316039608285, rel=1e-6)
        assert float(row["ratio_limit_2nd"]) == pytest.approx(18.999316, rel=1e-6)
        assert row["method"] == "all"

    def test_second_order_column_empty_far_from_contact(self, tmp_path):
        out = str(tmp_path / "far.csv")
        cfg = sweeps.SweepConfig(target="cavity", r=0.5, k0d=2.0, out=out)
        assert sweeps.run_sweep(cfg) == 0
        _, header, rows = read_csv(out)
        row = dict(zip(header.split(","), rows[0]))
        assert row["ratio_limit_2nd"] == ""

    def test_swept_axis_ordering_and_quick(self, tmp_path):
        full = str(tmp_path / "full.csv")
        cfg = sweeps.SweepConfig(target="subwavelength",
                                 r=sweeps.Range(-0.9, 0.9, 181), k0d=0.01,
                                 method="limit", out=full)
        assert sweeps.run_sweep(cfg) == 0
        _, _, rows = read_csv(full)
        assert len(rows) == 181
        rs = [float(r[1]) for r in rows]
        assert rs == sorted(rs)

        quick = str(tmp_path / "quick.csv")
        qcfg = sweeps.SweepConfig(target="subwavelength",
                                  r=sweeps.Range(-0.9, 0.9, 181), k0d=0.01,
                                  method="limit", out=quick, quick=True)
        assert sweeps.run_sweep(qcfg) == 0
        _, _, qrows = read_csv(quick)
        assert 10 <= len(qrows) < 60

    def test_deterministic_bytes(self, tmp_path):
        a, b = str(tmp_path / "a.csv"), str(tmp_path / "b.csv")
        for out in (a, b):
            cfg = sweeps.SweepConfig(target="mirror", r=-1.0,
                                     d_over_lambda0=sweeps.Range(0.0, 2.0, 11),
                                     out=out)
            assert sweeps.run_sweep(cfg) == 0
        bytes_a = open(a, "rb").read().replace(b"a.csv", b"X.csv")
        bytes_b = open(b, "rb").read().replace(b"b.csv", b"X.csv")
        assert bytes_a == bytes_b

    def test_failed_cell_marks_status_and_exit_code(self, tmp_path, capsys):
        out = str(tmp_path / "hard.csv")
        cfg = sweeps.SweepConfig(target="cavity", r=0.999, k0d=300.0,
                                 method="quadrature", max_evals=200_000, out=out)
        assert sweeps.run_sweep(cfg) == 3
        _, header, rows = read_csv(out)
        row = dict(zip(header.split(","), rows[0]))
        assert row["status"] == "NonConvergence"
        assert row["ratio_quadrature"] == "nan"
        err = capsys.readouterr().err
        assert "failed" in err

    def test_output_path_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv(sweeps.OUTDIR_ENV, str(tmp_path))
        cfg = sweeps.SweepConfig(target="cavity", r=0.5, k0d=1.0)
        assert sweeps.output_path(cfg) == str(tmp_path / "cavity.csv")
        assert sweeps.run_sweep(cfg) == 0
        assert os.path.exists(tmp_path / "cavity.csv")


class TestLindbladSweep:
    def test_csv_schema_and_content(self, tmp_path):
        out = str(tmp_path / "l.csv")
        cfg = sweeps.SweepConfig(target="lindblad", t=sweeps.Range(0.0, 2.0, 9),
                                 n_traj=150, out=out)
        assert sweeps.run_sweep(cfg) == 0
        _, header, rows = read_csv(out)
        assert header == LINDBLAD_HEADER
        assert len(rows) == 9
        first = dict(zip(header.split(","), rows[0]))
        assert float(first["t"]) == 0.0
        assert float(first["pop_jc"]) == pytest.approx(1.0, abs=1e-12)
        assert float(first["pop_single_rate"]) == pytest.approx(1.0, abs=1e-12)
        assert first["method"] == "lindblad"
        assert first["status"] == "ok"
        pops = np.array([float(r[1]) for r in rows])
        assert np.all(np.diff(pops) < 0.0)

    def test_deterministic_bytes(self, tmp_path):
        outs = []
        for name in ("x.csv", "y.csv"):
            out = str(tmp_path / name)
            cfg = sweeps.SweepConfig(target="lindblad",
                                     t=sweeps.Range(0.0, 2.0, 6), n_traj=120,
                                     out=out)
            assert sweeps.run_sweep(cfg) == 0
            outs.append(out)
        a = open(outs[0], "rb").read().replace(b"x.csv", b"z.csv")
        b = open(outs[1], "rb").read().replace(b"y.csv", b"z.csv")
        assert a == b


class TestFigures:
    def test_all_figures_quick(self, tmp_path):
        for fig in sweeps.FIGURE_IDS:
            outdir = str(tmp_path / fig)
            assert sweeps.reproduce_figure(fig, outdir=outdir, quick=True) == 0
            names = sorted(os.listdir(outdir))
            assert "manifest.txt" in names
            curves = [n for n in names if n.endswith(".csv")]
            assert len(curves) >= 3
            for name in curves:
                assert name.startswith(fig)

    def test_mirror_plasmonic_contact_intercepts(self, tmp_path):
        outdir = str(tmp_path / "fig")
        assert sweeps.reproduce_figure("mirror_plasmonic", outdir=outdir,
                                       quick=True) == 0
        for name in sorted(os.listdir(outdir)):
            if not name.endswith(".csv"):
                continue
            _, header, rows = read_csv(os.path.join(outdir, name))
            cols = header.split(",")
            first = dict(zip(cols, rows[0]))
            re_r = float(first["re_r"])
            assert float(first["d_over_lambda0"]) == 0.0
            assert float(first["ratio_closed"]) == pytest.approx(1.0 + re_r,
                                                                 abs=1e-14)

    def test_subwavelength_suppression_curve_shape(self, tmp_path):
        outdir = str(tmp_path / "fig")
        assert sweeps.reproduce_figure("subwl_dielectric_vs_r", outdir=outdir,
                                       quick=True) == 0
        name = [n for n in os.listdir(outdir) if "k0d0.001" in n][0]
        _, header, rows = read_csv(os.path.join(outdir, name))
        cols = header.split(",")
        idx = cols.index("ratio_limit_2nd")
        vals = [float(r[idx]) for r in rows]
        rs = [float(r[cols.index("r_mir")]) for r in rows]
        assert rs[0] == -1.0
        assert vals[0] == 0.0
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        assert all(v < 1.0 for v in vals[:-1])

    def test_enhancement_decays_with_spacing(self, tmp_path):
        outdir = str(tmp_path / "fig")
        assert sweeps.reproduce_figure("subwl_plasmonic_vs_d", outdir=outdir,
                                       quick=True) == 0
        for name in os.listdir(outdir):
            if not name.endswith(".csv"):
                continue
            _, header, rows = read_csv(os.path.join(outdir, name))
            cols = header.split(",")
            idx = cols.index("ratio_limit_2nd")
            assert float(rows[0][idx]) > float(rows[-1][idx]) > 1.0

    def test_unknown_figure_rejected(self, tmp_path):
        with pytest.raises(errors.ConfigError):
            sweeps.reproduce_figure("no_such_figure", outdir=str(tmp_path))
