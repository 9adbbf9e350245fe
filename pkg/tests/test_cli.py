"""Command-line interface: commands, exit codes, determinism."""

import pytest
from click.testing import CliRunner

from multitwist.cli import main

K2_GRAPH = "bipartite 1 1 1 2\nedge 0 0 1\n"
LADDER = "\n".join(["bipartite 3 4 6 2"] + [
    f"edge {e} {e if e % 2 == 0 else e + 1} {e if e % 2 else e + 1}"
    for e in range(-3, 3)]) + "\n"


@pytest.fixture
def runner():
    return CliRunner()


class TestHarmonic:
    def test_perron_k2(self, runner, tmp_path):
        gf = tmp_path / "k2.graph"
        gf.write_text(K2_GRAPH)
        res = runner.invoke(main, ["harmonic", str(gf)])
        assert res.exit_code == 0, res.output
        assert "lambda 1" in res.output

    def test_closed_form_ladder(self, runner, tmp_path):
        gf = tmp_path / "ladder.graph"
        gf.write_text(LADDER)
        res = runner.invoke(main, ["harmonic", str(gf), "--mode", "closed-form",
                                   "--lambda", "3"])
        assert res.exit_code == 0, res.output
        assert "3/2+1/2r5" in res.output  # r_plus at n = 1

    def test_malformed_edge_exits_2(self, runner, tmp_path):
        gf = tmp_path / "bad.graph"
        gf.write_text("bipartite 1 1 1 2\nedge zero 0 1\n")
        res = runner.invoke(main, ["harmonic", str(gf)])
        assert res.exit_code == 2
        assert "line 2" in res.output


class TestBuildVerify:
    def test_staircase_build_and_verify(self, runner, tmp_path):
        surf = tmp_path / "st.surf"
        res = runner.invoke(main, ["build", "--family", "staircase",
                                   "--window", "-4:5", "--lambda", "2",
                                   "-o", str(surf)])
        assert res.exit_code == 0, res.output
        assert "verification pass" in res.output
        res = runner.invoke(main, ["verify", str(surf)])
        assert res.exit_code == 0, res.output

    def test_tampered_height_fails_modulus(self, runner, tmp_path):
        surf = tmp_path / "st.surf"
        runner.invoke(main, ["build", "--family", "staircase", "--window",
                             "-4:5", "--lambda", "2", "-o", str(surf)])
        text = surf.read_text().replace("h 0 1\n", "h 0 7/5\n")
        (tmp_path / "bad.surf").write_text(text)
        res = runner.invoke(main, ["verify", str(tmp_path / "bad.surf")])
        assert res.exit_code == 1
        assert "modulus" in res.output

    def test_build_is_deterministic(self, runner, tmp_path):
        outs = []
        for name in ("a.surf", "b.surf"):
            surf = tmp_path / name
            res = runner.invoke(main, ["build", "--family", "staircase",
                                       "--window", "-3:4", "--lambda", "5/2",
                                       "-o", str(surf)])
            assert res.exit_code == 0
            outs.append(surf.read_bytes())
        assert outs[0] == outs[1]


class TestClassify:
    def test_parabolic_example(self, runner):
        res = runner.invoke(main, ["classify", "--word", "ab", "--lambda", "2"])
        assert res.exit_code == 0
        assert "parabolic" in res.output

    def test_hyperbolic_example(self, runner):
        res = runner.invoke(main, ["classify", "--word", "aB", "--lambda", "3"])
        assert res.exit_code == 0
        assert "trace 11" in res.output and "hyperbolic" in res.output
        assert "ks=(1, 1, 1, 0)" in res.output

    def test_empty_word_is_identity(self, runner):
        res = runner.invoke(main, ["classify", "--word", "", "--lambda", "2"])
        assert res.exit_code == 0
        assert "identity" in res.output

    def test_bad_letters_usage_error(self, runner):
        res = runner.invoke(main, ["classify", "--word", "xyz", "--lambda", "2"])
        assert res.exit_code == 2


class TestFlowSvg:
    def test_flow_and_svg(self, runner, tmp_path):
        surf = tmp_path / "st.surf"
        runner.invoke(main, ["build", "--family", "staircase", "--window",
                             "-4:5", "--lambda", "2", "-o", str(surf)])
        traj = tmp_path / "t.dump"
        res = runner.invoke(main, ["flow", str(surf), "--start", "0:1/4:1/10",
                                   "--dir", "1:1", "--length", "6",
                                   "-o", str(traj)])
        assert res.exit_code == 0, res.output
        assert traj.read_text().startswith("seg 0 ")
        svg = tmp_path / "out.svg"
        res = runner.invoke(main, ["svg", str(surf), "--traj", str(traj),
                                   "-o", str(svg)])
        assert res.exit_code == 0, res.output
        content = svg.read_text()
        assert content.startswith("<?xml") and "<svg" in content
        assert "<line" in content  # the trajectory overlay

    def test_svg_deterministic(self, runner, tmp_path):
        surf = tmp_path / "st.surf"
        runner.invoke(main, ["build", "--family", "staircase", "--window",
                             "-3:4", "--lambda", "2", "-o", str(surf)])
        outs = []
        for name in ("a.svg", "b.svg"):
            f = tmp_path / name
            res = runner.invoke(main, ["svg", str(surf), "--start", "0:0.25:0.1",
                                       "--dir", "1:1", "--length", "5",
                                       "-o", str(f)])
            assert res.exit_code == 0
            outs.append(f.read_bytes())
        assert outs[0] == outs[1]


class TestMulticurve:
    def test_loch_ness_surface_file(self, runner, tmp_path):
        out = tmp_path / "mc.surf"
        res = runner.invoke(main, ["multicurve", "--family", "loch-ness",
                                   "--depth", "2", "--m", "2", "-o", str(out)])
        assert res.exit_code == 0, res.output
        res = runner.invoke(main, ["verify", str(out), "--m", "2"])
        assert res.exit_code == 0, res.output

    def test_infeasible_reports_usage_error(self, runner):
        res = runner.invoke(main, ["multicurve", "--genus", "0",
                                   "--punctures", "1", "--m", "1"])
        assert res.exit_code == 2
        assert "sphere" in res.output


class TestHarmonicModes:
    def test_truncated_mode_with_boundary_file(self, runner, tmp_path):
        gf = tmp_path / "ladder.graph"
        gf.write_text(LADDER)
        bf = tmp_path / "boundary.harm"
        bf.write_text("lambda 2\nh -3 1\nh 3 1\n")
        out = tmp_path / "h.harm"
        res = runner.invoke(main, ["harmonic", str(gf), "--mode", "truncated",
                                   "--lambda", "2", "--boundary", str(bf),
                                   "-o", str(out)])
        assert res.exit_code == 0, res.output
        from multitwist import formats
        h = formats.parse_harmonic(out.read_text())
        assert all(abs(v - 1) < 1e-9 for v in h.values.values())

    def test_truncated_mode_needs_boundary(self, runner, tmp_path):
        gf = tmp_path / "ladder.graph"
        gf.write_text(LADDER)
        res = runner.invoke(main, ["harmonic", str(gf), "--mode", "truncated",
                                   "--lambda", "2"])
        assert res.exit_code == 2


class TestBuildModes:
    def test_closed_form_build_from_surface_file(self, runner, tmp_path):
        # strip the harmonic lines from a staircase file, rebuild closed-form
        surf = tmp_path / "st.surf"
        runner.invoke(main, ["build", "--family", "staircase", "--window",
                             "-3:4", "--lambda", "3", "-o", str(surf)])
        bare = "\n".join(l for l in surf.read_text().splitlines()
                         if not l.startswith(("lambda", "h ")))
        bare_f = tmp_path / "bare.surf"
        bare_f.write_text(bare + "\n")
        rebuilt = tmp_path / "rebuilt.surf"
        res = runner.invoke(main, ["build", str(bare_f), "--mode", "closed-form",
                                   "--lambda", "3", "-o", str(rebuilt)])
        assert res.exit_code == 0, res.output
        assert rebuilt.read_text() == surf.read_text()
