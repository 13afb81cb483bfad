import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from specular.blocks import Diamond, diamond_scene
from specular.cli import main, radians
from specular.io import (SceneParseError, dumps_report, dumps_scene, loads_scene, read_scene,
                         render_svg, report, write_scene)
from specular.scene import Scene

coord = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def test_empty_scene_header_only():
    assert dumps_scene(Scene()) == "specular-scene v1\n"
    assert len(loads_scene("specular-scene v1\n")) == 0


def test_one_segment_two_lines():
    text = dumps_scene(Scene([((0, 0), (1, 0.1))]))
    assert text.count("\n") == 2 and text.splitlines()[1] == "segment 0.0 0.0 1.0 0.1"


@given(st.lists(st.tuples(coord, coord, coord, coord), max_size=20))
def test_roundtrip_bit_exact(rows):
    rows = [r for r in rows if (r[0], r[1]) != (r[2], r[3])]
    sc = Scene(np.array(rows, dtype=float).reshape(-1, 4), {"kind": "test", "n": str(len(rows))})
    back = loads_scene(dumps_scene(sc))
    assert np.array_equal(back.segs, sc.segs) and back.meta == sc.meta


def test_large_roundtrip(tmp_path, rng):
    sc = Scene(rng.normal(size=(10_000, 4)))
    write_scene(sc, tmp_path / "a.scene")
    assert np.array_equal(read_scene(tmp_path / "a.scene").segs, sc.segs)


@pytest.mark.parametrize("text,line", [
    ("", 1),
    ("specular-scene v2\n", 1),
    ("specular-scene v1\nsegment 0 0 1\n", 2),
    ("specular-scene v1\n# a b\n\nsegment 0 0 x 1\n", 4),
    ("specular-scene v1\nsegment 1 1 1 1\n", 2),
    ("specular-scene v1\nsegment 0 0 nan 1\n", 2),
])
def test_parse_errors(text, line):
    with pytest.raises(SceneParseError) as e:
        loads_scene(text)
    assert e.value.line == line


def test_report_embeds_reproduction_data():
    r = report("x", {"seed": 3, "grid_step": 1e-3}, {"v": np.float64(1.5), "nan": float("nan")})
    d = json.loads(dumps_report(r))
    assert d["version"] and d["params"]["seed"] == 3 and d["params"]["eps_geom"] == 1e-9
    assert d["result"]["nan"] is None


def test_svg_empty_and_deterministic():
    svg = render_svg(Scene())
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    sc = diamond_scene([Diamond((0, 0), 1)])
    assert render_svg(sc) == render_svg(sc.copy())
    assert render_svg(sc).count('class="mirror"') == 3


def test_svg_mirror_mode_styles():
    from specular.mirror import copies_of_Z, mirror_segments
    th = math.pi / 4
    sc = Scene(mirror_segments(4, [3, 1, 2, 4], th))
    svg = render_svg(sc, rhombi=list(copies_of_Z(4, [3, 1, 2, 4], th)))
    assert svg.count('class="rhombus"') == 4 and svg.count("stroke-dasharray") == 4


def test_radians_parser():
    assert radians("pi/4") == math.pi / 4
    assert radians("0.3") == 0.3
    for bad in ("45deg", "45°", "__import__('os')", "pi/0"):
        with pytest.raises(Exception):
            radians(bad)


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_cli_shadow_unit_segment(tmp_path, capsys):
    p = tmp_path / "h.scene"
    write_scene(Scene([((0, 0), (1, 0))]), p)
    code, out = _run(capsys, "shadow", "--scene", str(p), "--alpha", "0")
    assert code == 0 and json.loads(out)["result"]["measure"] == [1.0]


def test_cli_usage_errors(tmp_path, capsys):
    assert main(["shadow", "--scene", "x", "--alpha", "30deg"]) == 2
    assert main(["nonsense"]) == 2
    assert main(["shadow", "--scene", str(tmp_path / "missing"), "--alpha", "0"]) == 2
    bad = tmp_path / "bad.scene"
    bad.write_text("specular-scene v1\nsegment 1 2\n")
    assert main(["shadow", "--scene", str(bad), "--alpha", "0"]) == 2
    capsys.readouterr()


def test_cli_verify_block_empty_fails(tmp_path, capsys):
    p = tmp_path / "e.scene"
    write_scene(Scene(), p)
    code, out = _run(capsys, "verify-block", "--scene", str(p))
    assert code == 1 and json.loads(out)["result"]["accepted"] is False


def test_cli_mirror_pipeline_deterministic(tmp_path, capsys):
    m = tmp_path / "m.scene"
    outs = []
    for _ in range(2):
        code, out = _run(capsys, "build-mirror", "--theta", "pi/4", "--eps", "0.5",
                         "--alpha", "pi/2+pi/8", "--budget", "64", "--scene-out", str(m))
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    code, out = _run(capsys, "verify-mirror", "--scene", str(m), "--theta", "pi/4",
                     "--alpha", "pi/2+pi/8", "--n", "200")
    assert code == 0 and json.loads(out)["result"]["part_i"]["passed"]
    a = tmp_path / "a.svg"
    b = tmp_path / "b.svg"
    assert main(["render", "--scene", str(m), "--mirror-mode", "--ray", "0:0.3", "--out", str(a)]) == 0
    assert main(["render", "--scene", str(m), "--mirror-mode", "--ray", "0:0.3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_trace(tmp_path, capsys):
    p = tmp_path / "d.scene"
    write_scene(Scene([((-1, 1), (1, -1))]), p)
    code, out = _run(capsys, "trace", "--scene", str(p), "--angle", "pi/2", "--offset", "-0.2")
    r = json.loads(out)["result"]
    assert code == 0 and r["bounces"] == 1
    assert abs(r["exit"]["v"][0] - math.cos(math.pi)) < 1e-12
