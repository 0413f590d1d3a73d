"""Command line interface: exit codes, outputs, determinism."""

from pathlib import Path

import pytest

from latticeplan.cli import main

OPEN_SCENARIO = """\
dim 2
workspace 0 0 1 1
start 0.1 0.35
target 0.9 0.35
obstacle box 0.41 0 0.44 0.68 known
sensing_radius 0.12
step 0.05
"""

SEALED_SCENARIO = """\
dim 2
workspace 0 0 1 1
start 0.08 0.08
target 0.5 0.5
obstacle box 0.33 0.33 0.4 0.67 known
obstacle box 0.6 0.33 0.67 0.67 known
obstacle box 0.33 0.33 0.67 0.4 known
obstacle box 0.33 0.6 0.67 0.67 known
sensing_radius 0.1
step 0.04
"""


@pytest.fixture
def scn(tmp_path):
    p = tmp_path / "scene.scn"
    p.write_text(OPEN_SCENARIO)
    return p


def test_validate_ok(scn, capsys):
    assert main(["validate", "--scenario", str(scn)]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_bad_file(tmp_path):
    p = tmp_path / "bad.scn"
    p.write_text("dim 5\n")
    assert main(["validate", "--scenario", str(p)]) == 4


def test_validate_missing_file(tmp_path):
    assert main(["validate", "--scenario", str(tmp_path / "nope.scn")]) == 4


def test_plan_success_writes_outputs(scn, tmp_path):
    out = tmp_path / "out"
    code = main(["plan", "--scenario", str(scn), "--out", str(out),
                 "--svg", "--metrics"])
    assert code == 0
    assert (out / "trajectory.csv").exists()
    assert (out / "metrics.csv").exists()
    assert (out / "graph_000.txt").exists()
    assert (out / "segment_000.svg").exists()


def test_plan_no_path_exit_code(tmp_path):
    p = tmp_path / "sealed.scn"
    p.write_text(SEALED_SCENARIO)
    assert main(["plan", "--scenario", str(p)]) == 2


def test_plan_resource_limit_exit_code(scn):
    assert main(["plan", "--scenario", str(scn),
                 "--override", "max_vertices=10"]) == 3


def test_override_applies(scn, tmp_path):
    out = tmp_path / "o"
    assert main(["plan", "--scenario", str(scn), "--out", str(out),
                 "--metrics", "--override", "step=0.04"]) == 0
    assert ",0.04," in (out / "metrics.csv").read_text()


def test_region_containment(scn, tmp_path, capsys):
    out = tmp_path / "r"
    code = main(["region", "--scenario", str(scn), "--out", str(out), "--svg"])
    captured = capsys.readouterr().out
    assert code == 0
    assert "containment: yes" in captured
    assert (out / "region.txt").exists()
    assert (out / "region.svg").exists()


def test_region_shift_breaks_containment(scn, tmp_path):
    # Structural self-check: displacing the region must flip the verdict.
    shifted = tmp_path / "shifted.scn"
    shifted.write_text(OPEN_SCENARIO + "region_shift 0.3 0.3\n")
    assert main(["region", "--scenario", str(shifted)]) == 2


def test_batch_aggregates(scn, tmp_path):
    other = tmp_path / "other.scn"
    other.write_text(OPEN_SCENARIO.replace("step 0.05", "step 0.04"))
    out = tmp_path / "b"
    code = main(["batch", "--scenario", str(scn), str(other), "--out", str(out)])
    assert code == 0
    table = (out / "batch_metrics.csv").read_text().strip().splitlines()
    assert len(table) == 3 and table[0].startswith("scenario,")


def test_svg_outputs_are_deterministic(scn, tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        assert main(["plan", "--scenario", str(scn), "--out", str(out),
                     "--svg"]) == 0
        outs.append((out / "segment_000.svg").read_bytes())
    assert outs[0] == outs[1]
