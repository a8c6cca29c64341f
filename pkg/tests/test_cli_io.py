import json
import subprocess
import sys
from collections import Counter
from pathlib import Path

from momstrat import hamiltonian_stratification, density_polynomial
from momstrat.cli import main
from momstrat.io import (
    make_document,
    parse_document,
    parse_input_file,
    serialize_document,
)
from support import paper_action

INPUTS = Path(__file__).resolve().parent.parent / "inputs"


def run_cli(*argv):
    return main(list(argv))


def test_parse_toric_spec_file():
    raw = (INPUTS / "paper_cp1xcp2.json").read_bytes()
    action = parse_input_file(raw)
    assert action.n == 3 and action.k == 2
    assert action.name == "paper_cp1xcp2"


def test_parse_cover_file():
    raw = (INPUTS / "counterexample_cover.json").read_bytes()
    cover = parse_input_file(raw)
    assert len(cover.members) == 3


def test_document_round_trip_bit_identical():
    a = paper_action()
    s = hamiltonian_stratification(a)
    dens = {st.id: density_polynomial(a, s, st.id) for st in s.strata if st.dim == 2}
    doc = make_document(s, dens, raw_input=b"unit-test")
    text = serialize_document(doc)
    parsed = parse_document(text.encode("utf-8"))
    assert parsed == doc
    assert serialize_document(parsed) == text


def test_cli_stratify_paper_golden(tmp_path):
    out = tmp_path / "strat.json"
    code = run_cli("stratify", str(INPUTS / "paper_cp1xcp2.json"), "--out", str(out))
    assert code == 0
    data = json.loads(out.read_text())
    assert Counter(st["dim"] for st in data["strata"]) == Counter({0: 7, 1: 10, 2: 4})
    blue = [
        st
        for st in data["strata"]
        if st["dim"] == 0 and st["cells"][0]["closure_vertices"] == [["1", "2"]]
    ]
    assert len(blue) == 1


def test_cli_stratify_square_identity(tmp_path):
    out = tmp_path / "strat.json"
    assert run_cli("stratify", str(INPUTS / "square_identity.json"), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    assert len(data["strata"]) == 9


def test_cli_stratify_simplex_sum(tmp_path):
    out = tmp_path / "strat.json"
    assert run_cli("stratify", str(INPUTS / "simplex_sum.json"), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    assert len(data["strata"]) == 3


def test_cli_stratify_valid_cover_file(tmp_path):
    out = tmp_path / "strat.json"
    assert run_cli("validate-cover", str(INPUTS / "square_cover.json"), "--out", str(tmp_path / "v.json")) == 0
    assert run_cli("stratify", str(INPUTS / "square_cover.json"), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    assert len(data["strata"]) == 9


def test_cli_dh_paper_densities(tmp_path):
    out = tmp_path / "dh.json"
    assert run_cli("dh", str(INPUTS / "paper_cp1xcp2.json"), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    densities = {}
    for st in data["strata"]:
        if "density" in st:
            coeffs = {
                tuple(item["exponents"]): item["value"]
                for item in st["density"]["coefficients"]
            }
            densities[st["id"]] = coeffs
    assert len(densities) == 4
    polys = sorted(tuple(sorted(c.items())) for c in densities.values())
    assert polys == sorted(
        [
            tuple(sorted({(1, 0): "1"}.items())),
            tuple(sorted({(0, 0): "1"}.items())),
            tuple(sorted({(0, 0): "4", (1, 0): "-1", (0, 1): "-1"}.items())),
            tuple(sorted({(0, 0): "3", (0, 1): "-1"}.items())),
        ]
    )


def test_cli_dh_simplex_sum(tmp_path):
    out = tmp_path / "dh.json"
    assert run_cli("dh", str(INPUTS / "simplex_sum.json"), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    tops = [st for st in data["strata"] if "density" in st]
    assert len(tops) == 1
    assert tops[0]["density"]["coefficients"] == [{"exponents": [1], "value": "1"}]


def test_cli_dh_identity_constant(tmp_path):
    out = tmp_path / "dh.json"
    assert run_cli("dh", str(INPUTS / "square_identity.json"), "--out", str(out)) == 0
    data = json.loads(out.read_text())
    tops = [st for st in data["strata"] if "density" in st]
    assert len(tops) == 1
    assert tops[0]["density"]["coefficients"] == [{"exponents": [0, 0], "value": "1"}]


def test_cli_determinism_byte_identical(tmp_path):
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    run_cli("dh", str(INPUTS / "paper_cp1xcp2.json"), "--seed", "5", "--out", str(out1))
    run_cli("dh", str(INPUTS / "paper_cp1xcp2.json"), "--seed", "5", "--out", str(out2))
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_determinism_across_processes(tmp_path):
    # fresh interpreters with different hash seeds must agree byte for byte
    outputs = []
    for hash_seed in ("1", "2"):
        out = tmp_path / f"proc_{hash_seed}.json"
        env = dict(**__import__("os").environ, PYTHONHASHSEED=hash_seed)
        proc = subprocess.run(
            [
                sys.executable,
                "-m",
                "momstrat.cli",
                "dh",
                str(INPUTS / "paper_cp1xcp2.json"),
                "--seed",
                "5",
                "--out",
                str(out),
            ],
            env=env,
            capture_output=True,
        )
        assert proc.returncode == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run_cli("stratify", str(bad)) == 2
    assert run_cli("stratify", str(tmp_path / "missing.json")) == 2
    assert run_cli("validate-cover", str(INPUTS / "counterexample_cover.json"), "--out", str(tmp_path / "r.json")) == 3
    assert run_cli("stratify", str(INPUTS / "counterexample_cover.json")) == 3


def test_cli_render_paper(tmp_path):
    strat = tmp_path / "strat.json"
    run_cli("dh", str(INPUTS / "paper_cp1xcp2.json"), "--out", str(strat))
    svg = tmp_path / "out.svg"
    assert run_cli("render", str(strat), "--labels", "--out", str(svg)) == 0
    text = svg.read_text()
    assert text.startswith("<?xml")
    assert text.count("<circle") == 7
    assert text.count("<line") == 10
    assert text.count("<polygon") == 4
    assert "4 - x - y" in text and "3 - y" in text
    # determinism
    svg2 = tmp_path / "out2.svg"
    run_cli("render", str(strat), "--labels", "--out", str(svg2))
    assert svg.read_bytes() == svg2.read_bytes()


def test_cli_render_interval(tmp_path):
    strat = tmp_path / "strat.json"
    run_cli("stratify", str(INPUTS / "simplex_sum.json"), "--out", str(strat))
    svg = tmp_path / "out.svg"
    assert run_cli("render", str(strat), "--out", str(svg)) == 0
    assert svg.read_text().count("<circle") == 2


def test_cli_render_unsupported_dimension(tmp_path):
    spec = {
        "name": "cube_identity",
        "ambient_dim": 3,
        "inequalities": [
            {"normal": [-1, 0, 0], "offset": "0"},
            {"normal": [1, 0, 0], "offset": "1"},
            {"normal": [0, -1, 0], "offset": "0"},
            {"normal": [0, 1, 0], "offset": "1"},
            {"normal": [0, 0, -1], "offset": "0"},
            {"normal": [0, 0, 1], "offset": "1"},
        ],
        "subtorus_matrix": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
    }
    path = tmp_path / "cube.json"
    path.write_text(json.dumps(spec))
    strat = tmp_path / "strat.json"
    assert run_cli("stratify", str(path), "--out", str(strat)) == 0
    assert run_cli("render", str(strat)) == 6


def test_cli_render_square_identity(tmp_path):
    strat = tmp_path / "strat.json"
    run_cli("stratify", str(INPUTS / "square_identity.json"), "--out", str(strat))
    svg = tmp_path / "out.svg"
    assert run_cli("render", str(strat), "--out", str(svg)) == 0
    text = svg.read_text()
    assert text.count("<circle") == 4
    assert text.count("<line") == 4
    assert text.count("<polygon") == 1


def test_cli_non_delzant_is_labeled_formal(tmp_path, capsys):
    spec = {
        "name": "non_delzant",
        "ambient_dim": 2,
        "inequalities": [
            {"normal": [0, -1], "offset": "0"},
            {"normal": [1, 1], "offset": "2"},
            {"normal": [-1, 1], "offset": "0"},
        ],
        "subtorus_matrix": [[1, 0], [0, 1]],
    }
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    out = tmp_path / "strat.json"
    assert run_cli("stratify", str(path), "--out", str(out)) == 0
    captured = capsys.readouterr()
    assert "not Delzant" in captured.err
    data = json.loads(out.read_text())
    assert data["provenance"]["formal"] == "true"


def test_cli_oracle(tmp_path):
    out = tmp_path / "oracle.json"
    code = run_cli(
        "oracle",
        str(INPUTS / "paper_cp1xcp2.json"),
        "--point",
        "1/2,1",
        "--trials",
        "20000",
        "--seed",
        "3",
        "--out",
        str(out),
    )
    assert code == 0
    data = json.loads(out.read_text())
    assert data["points"][0]["exact"] == "1/2"
    assert data["points"][0]["sigmas_off"] <= 4


def test_cli_entrypoint_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "momstrat.cli", "stratify", str(INPUTS / "simplex_sum.json")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert '"schema": "momstrat.stratification/1"' in proc.stdout


def test_seed_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("STRATA_SEED", "12345")
    from momstrat.cli import build_parser

    args = build_parser().parse_args(["dh", "x.json"])
    assert args.seed == 12345
