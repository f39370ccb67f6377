import json
from pathlib import Path

import numpy as np
import pytest

from hopfseg.cli import main
from hopfseg.errors import SchemaError
from hopfseg.rational import monomial, rational
from hopfseg.serialize import emit_function, parse_function, render_svg


def test_parse_cubic_spec():
    f = parse_function('{"leading":[0.25,0],"roots":[{"z":[0,0],"mult":3}]}')
    assert f.leading == 0.25
    assert f.interior_roots == ((0j, 3),)


def test_parse_missing_leading():
    with pytest.raises(SchemaError) as err:
        parse_function('{"roots":[]}')
    assert err.value.pointer == "/leading"


def test_parse_duplicate_roots_merged():
    f = parse_function(
        '{"leading":[1,0],"roots":[{"z":[0.1,0],"mult":1},{"z":[0.1,1e-14],"mult":2}]}'
    )
    assert f.interior_roots == ((0.1 + 0j, 3),)


def test_parse_bad_mult_pointer():
    with pytest.raises(SchemaError) as err:
        parse_function('{"leading":[1,0],"roots":[{"z":[0,0],"mult":0}]}')
    assert err.value.pointer == "/roots/0/mult"


def test_roundtrip_bit_identical():
    f = rational(0.25 + 1e-17j if False else 0.25, roots=[(0.1 + 0.2j, 2), (-0.3, 1)],
                 unit_num=[(1.5 - 0.7j, 1)], unit_den=[(-2.0, 2)])
    text = emit_function(f)
    g = parse_function(text)
    assert emit_function(g) == text
    assert g.leading == f.leading
    assert g.interior_roots == f.interior_roots
    assert g.unit_num == f.unit_num and g.unit_den == f.unit_den


def test_svg_deterministic():
    from hopfseg.nodal import trace
    from hopfseg.states import reconstruct

    st = reconstruct(rational(0.25), 0.0, resolution=96)
    g = trace(st)
    assert render_svg(graph=g) == render_svg(graph=g)
    svg = render_svg(graph=g)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<circle") >= 3  # disk plus two boundary zeros


def test_svg_cubic_five_rays(tmp_path):
    from hopfseg.nodal import trace
    from hopfseg.states import reconstruct

    st = reconstruct(monomial(0.25, 3), 0.0, resolution=128)
    svg = render_svg(graph=trace(st))
    assert svg.count("<path") == 5
    assert svg.count('fill="black"/>') == 1  # one filled critical dot
    assert svg.count('fill="white"') == 5    # five open boundary circles


def _write_spec(tmp_path, f):
    p = tmp_path / "f.json"
    p.write_text(emit_function(f))
    return p


def test_cli_check_admissible(tmp_path, capsys):
    p = _write_spec(tmp_path, monomial(0.25, 3))
    code = main(["check", "-i", str(p), "-o", str(tmp_path / "out")])
    assert code == 0
    rep = json.loads((tmp_path / "out" / "report.json").read_text())
    assert rep["admissible"] is True
    assert rep["command"] == "check"
    assert "defaults" in rep


def test_cli_check_nonadmissible(tmp_path, capsys):
    w = 0.1 * np.exp(0.2j)
    p = _write_spec(tmp_path, rational(0.25, roots=[(0, 1), (w, 2)]))
    code = main(["check", "-i", str(p), "-o", str(tmp_path / "out"), "--base", "0,0"])
    assert code == 1


def test_cli_index(tmp_path, capsys):
    p = _write_spec(tmp_path, monomial(0.25, 3))
    out = tmp_path / "out"
    code = main(["index", "-i", str(p), "-o", str(out), "--resolution", "128"])
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert (rep["M"], rep["N"], rep["T"]) == (5, 5, 1)
    assert rep["index_sum"] == 3
    assert rep["formula_check"] and rep["euler_check"]


def test_cli_reconstruct_artifacts(tmp_path, capsys):
    p = _write_spec(tmp_path, rational(0.25))
    out = tmp_path / "out"
    code = main(["reconstruct", "-i", str(p), "-o", str(out), "--resolution", "128"])
    assert code == 0
    assert (out / "grid.csv").exists()
    rep = json.loads((out / "report.json").read_text())
    assert rep["n_species"] == 2
    assert rep["dirichlet_energy"] == pytest.approx(np.pi / 2, rel=0.03)


def test_cli_desingularize(tmp_path, capsys):
    p = _write_spec(tmp_path, monomial(0.25, 3))
    out = tmp_path / "out"
    code = main([
        "desingularize", "-i", str(p), "-o", str(out),
        "--eps", "0.01", "--branch", "0", "--resolution", "128",
    ])
    assert code == 0
    f_new = parse_function((out / "f_new.json").read_text())
    assert sum(m for _, m in f_new.interior_roots) == 3
    assert (out / "f_new.svg").exists()
    rep = json.loads((out / "report.json").read_text())
    assert rep["epsilon"] == 0.01


def test_cli_deterministic_bytes(tmp_path, capsys):
    p = _write_spec(tmp_path, monomial(0.25, 3))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    main(["trace", "-i", str(p), "-o", str(out1), "--resolution", "128"])
    main(["trace", "-i", str(p), "-o", str(out2), "--resolution", "128"])
    assert (out1 / "graph.json").read_bytes() == (out2 / "graph.json").read_bytes()
    assert (out1 / "report.json").read_bytes() == (out2 / "report.json").read_bytes()


def test_cli_schema_error_exit(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"roots": []}')
    code = main(["check", "-i", str(p), "-o", str(tmp_path / "out")])
    assert code == 1
    msg = json.loads(capsys.readouterr().out)
    assert msg["error"] == "SchemaError"
