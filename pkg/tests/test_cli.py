import io
import json
import subprocess
import sys
from fractions import Fraction

import pytest

from capax import cli
from capax.corpus import load_fixture

SUBCOMMAND_ARGS = [
    ["ech", "--fixture", "ball", "--kmax", "8", "--witness"],
    ["alg-toric", "--fixture", "tri21", "--kmax", "10", "--witness"],
    ["alg-surface", "--fixture", "f1", "--kmax", "6", "--witness"],
    ["weights", "--fixture", "tri32"],
    ["cap", "--fixture", "square", "--x", "0,1/2,3"],
    ["gap", "--fixture", "square", "--kmax", "30"],
    ["asymptotics", "--fixture", "ball", "--kmax", "60"],
    ["chambers", "--fixture", "f1", "--k", "3", "--resolution", "30"],
    ["oracle", "--fixture", "ball", "--kmax", "5", "--box", "4"],
    ["fixtures"],
    ["fixtures", "p2"],
]


def call(*argv):
    buf = io.StringIO()
    code = cli.run(list(argv), out=buf)
    return code, buf.getvalue()


def dec(x):
    """Inverse of the [num, den] encoding for leaves that look like rationals."""
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, int) for v in x) and x[1] > 0:
        return Fraction(x[0], x[1])
    if isinstance(x, list):
        return [dec(v) for v in x]
    if isinstance(x, dict):
        return {k: dec(v) for k, v in x.items()}
    return x


def csv_values(text):
    lines = [line for line in text.strip().splitlines() if not line.startswith("#")]
    out = []
    for line in lines[1:]:
        parts = line.split(",")
        out.append(Fraction(int(parts[1]), int(parts[2])))
    return out


@pytest.fixture
def ball_json(tmp_path):
    p = tmp_path / "ball.json"
    p.write_text(json.dumps({"vertices": [[0, 1], [1, 0]]}))
    return str(p)


@pytest.fixture
def square_json(tmp_path):
    p = tmp_path / "square.json"
    p.write_text(json.dumps({"vertices": [[0, 1], [1, 1], [1, 0]]}))
    return str(p)


def test_ech_matches_fixture(ball_json):
    code, text = call("ech", "--domain", ball_json, "--kmax", "6")
    assert code == 0
    assert text.splitlines()[0] == "k,value_num,value_den"
    assert csv_values(text) == load_fixture("ball").capacities()[:7]


def test_ech_oracle_check_and_witness_alias(ball_json):
    code, text = call("ech", "--domain", ball_json, "--kmax", "5", "--witnesses", "--oracle-check", "5")
    assert code == 0 and "witness" in text.splitlines()[0]


def test_gap_square_routes_agree(square_json):
    code, text = call("gap", "--domain", square_json, "--kmax", "40")
    assert code == 0
    data = dec(json.loads(text))
    assert data["gap"] == 1 and data["tight"] is True
    assert len(data["routes"]) >= 3 and all(data["routes"].values())
    assert data["tail"]["residues"] == [0, 1]


def test_gap_surface_with_A(tmp_path):
    p = tmp_path / "p2.json"
    p.write_text(json.dumps(load_fixture("p2").input))
    code, text = call("gap", "--surface", str(p), "--A", "3")
    assert code == 0 and dec(json.loads(text))["gap"] == 3


def test_chambers_f1_k3():
    code, text = call("chambers", "--fixture", "f1", "--k", "3", "--resolution", "100")
    assert code == 0
    rows = [line.split(",") for line in text.splitlines()[1:] if not line.startswith("#")]
    assert [r[-1] for r in rows] == ["3F", "F+D_inf", "2D_inf"]
    walls = json.loads(text.splitlines()[-1].split(" ", 2)[2])
    assert dec(walls) == [Fraction(1, 3), Fraction(1, 2)]


def test_alg_surface_witness_labels():
    code, text = call("alg-surface", "--fixture", "f1", "--A", "1,2", "--kmax", "1", "--witness")
    assert code == 0
    assert text.splitlines()[-1] == "1,2,1,F"


def test_cap_xmax():
    code, text = call("cap", "--fixture", "ball", "--xmax", "3")
    assert code == 0
    assert [int(line.split(",")[2]) for line in text.splitlines()[1:]] == [1, 3, 6, 10]


def test_obstruct_aliases(tmp_path, ball_json):
    big = tmp_path / "big.json"
    big.write_text(json.dumps({"vertices": [[0, 2], [2, 0]]}))
    code, text = call("obstruct", "--a", str(big), "--b", ball_json, "--kmax", "4")
    assert code == 0
    data = json.loads(text)
    assert data["first_k"] == 1 and data["capacity_verdict"] == "obstructed"


def test_weights_round_trip():
    code, text = call("weights", "--fixture", "tri32")
    assert code == 0
    data = dec(json.loads(text))
    assert "gcd" in data
    assert json.loads(json.dumps(cli.enc(data))) == json.loads(text)


def test_asymptotics_from_sequence(tmp_path):
    code, text = call("ech", "--fixture", "ball", "--kmax", "40")
    seq = tmp_path / "seq.csv"
    seq.write_text(text)
    code, out = call("asymptotics", "--input", str(seq), "--Asq", "1", "--minus-KA", "3")
    assert code == 0
    data = dec(json.loads(out))
    assert data["gap"] == 1 and data["predicted_limsup"] == Fraction(-1, 2)
    assert data["quasi_polynomial"]["constants"] == [1]


def test_asymptotics_domain_report():
    code, text = call("asymptotics", "--fixture", "ball", "--kmax", "60")
    data = dec(json.loads(text))
    assert data["ruelle"] == 2 and data["gap"] == 1
    assert data["quasi_polynomial"]["fitted_quad"] == Fraction(1, 2)


@pytest.mark.parametrize("argv", SUBCOMMAND_ARGS, ids=lambda a: "-".join(a[:2]))
def test_deterministic_across_threads(argv, monkeypatch):
    monkeypatch.delenv("CAPAX_THREADS", raising=False)
    c1, t1 = call("--threads", "1", *argv)
    c2, t2 = call("--threads", "2", *argv)
    c3, t3 = call("--threads", "1", *argv)
    assert c1 == c2 == 0
    assert t1 == t2 == t3


def test_threads_env_fallback(monkeypatch):
    monkeypatch.setenv("CAPAX_THREADS", "2")
    assert call("chambers", "--fixture", "f1", "--k", "1", "--resolution", "8")[0] == 0
    monkeypatch.setenv("CAPAX_THREADS", "many")
    assert call("chambers", "--fixture", "f1", "--k", "1", "--resolution", "8")[0] == 2


@pytest.mark.parametrize("argv", [
    ["ech", "--fixture", "ball", "--kmax", "-1"],
    ["ech", "--domain", "/nonexistent.json", "--kmax", "2"],
    ["ech", "--fixture", "nope", "--kmax", "2"],
    ["ech", "--kmax", "2"],
    ["frobnicate"],
    ["alg-toric", "--fixture", "ball", "--kmax", "2", "--step", "0"],
    ["alg-toric", "--fixture", "ball", "--kmax", "2", "--step", "x"],
    ["alg-surface", "--fixture", "f1", "--kmax", "2", "--A", "-1,1"],
    ["alg-surface", "--fixture", "f1", "--kmax", "2", "--A", "1,2,3"],
    ["gap", "--fixture", "ball", "--A", "2"],
    ["asymptotics", "--input", "x.csv"],
    ["asymptotics", "--fixture", "ball", "--Asq", "1"],
    ["cap", "--fixture", "ball", "--x", "1", "--xmax", "2"],
    ["chambers", "--fixture", "f1", "--k", "1", "--plane", "0,7"],
    ["--max-nodes", "0", "ech", "--fixture", "ball", "--kmax", "2"],
])
def test_invalid_input_exit_2(argv, capsys):
    code, _ = call(*argv)
    assert code == 2
    err = capsys.readouterr().err
    assert "error" in err or "usage" in err


def test_bad_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert call("ech", "--domain", str(p), "--kmax", "1")[0] == 2
    p.write_text(json.dumps({"vertices": [[0, 1], [1, 2]]}))  # increasing
    assert call("ech", "--domain", str(p), "--kmax", "1")[0] == 2


def test_resource_limit_exit_3(capsys):
    code, _ = call("--max-nodes", "5", "ech", "--fixture", "ball", "--kmax", "30")
    assert code == 3
    assert "resource limit" in capsys.readouterr().err


def test_oracle_mismatch_exit_1(monkeypatch):
    real = cli.brute_oracle_table
    monkeypatch.setattr(cli, "brute_oracle_table", lambda d, k, b: [v + 1 for v in real(d, k, b)])
    assert call("oracle", "--fixture", "ball", "--kmax", "3", "--box", "4", "--check")[0] == 1
    assert call("ech", "--fixture", "ball", "--kmax", "3", "--oracle-check", "4")[0] == 1


def test_fixture_verify():
    code, text = call("fixtures", "p2", "--verify")
    assert code == 0 and text == "ok\n"


def test_fixture_json_round_trip():
    code, text = call("fixtures", "f1")
    data = json.loads(text)
    assert data["input"]["lattice"]["gram"] == [[0, 1], [1, 1]]
    caps = [dec(v) for _, v, src in data["golden"]["capacities"] if src == "nef_scan"]
    assert caps == load_fixture("f1").capacities("nef_scan")


def test_plot_files_written_and_stable(tmp_path):
    svg1, svg2, png = tmp_path / "a.svg", tmp_path / "b.svg", tmp_path / "e.png"
    data = tmp_path / "e.csv"
    for target in (svg1, svg2):
        code, _ = call("asymptotics", "--fixture", "ball", "--kmax", "80", "--plot", str(target))
        assert code == 0
    assert svg1.read_bytes() == svg2.read_bytes()
    code, _ = call("asymptotics", "--fixture", "square", "--kmax", "80", "--plot", str(png), "--data", str(data))
    assert code == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    assert data.read_text().splitlines()[0] == "k,value_num,value_den,e_k"


def test_chamber_svg(tmp_path):
    p = tmp_path / "ch.svg"
    code, _ = call("chambers", "--fixture", "f1", "--k", "2", "--resolution", "20", "--svg", str(p))
    assert code == 0
    assert p.read_text().lstrip().startswith("<?xml")


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "capax.cli", "fixtures"], capture_output=True, text=True)
    assert r.returncode == 0 and "f1" in r.stdout.split()
    r = subprocess.run([sys.executable, "-m", "capax.cli", "ech", "--kmax", "1"], capture_output=True, text=True)
    assert r.returncode == 2
