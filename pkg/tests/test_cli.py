import json
from pathlib import Path

import pytest

from ontosymm.cli import main

GOLDEN = Path(__file__).parent / "golden" / "maudlin.json"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def maudlin_file(tmp_path):
    p = tmp_path / "maudlin.json"
    p.write_text(GOLDEN.read_text())
    return str(p)


@pytest.fixture
def classical_file(tmp_path, capsys):
    p = tmp_path / "classical2.json"
    assert main(["build", "classical", "--k", "2", "-o", str(p)]) == 0
    return str(p)


def test_build_maudlin_matches_golden(capsys):
    code, out, _ = run(capsys, "build", "maudlin")
    assert code == 0
    assert out == GOLDEN.read_text()


def test_build_is_deterministic(capsys):
    assert run(capsys, "build", "maudlin")[1] == run(capsys, "build", "maudlin")[1]


def test_check_maudlin(capsys, maudlin_file):
    code, out, _ = run(capsys, "check", maudlin_file)
    assert code == 0
    assert out.count("PASS") == 5 and "FAIL" not in out


def test_check_json(capsys, maudlin_file):
    code, out, _ = run(capsys, "check", maudlin_file, "--format", "json")
    assert code == 0
    assert all(c["pass"] for c in json.loads(out)["checks"])


def test_check_missing_cell(capsys, tmp_path):
    d = json.loads(GOLDEN.read_text())
    d["experiment"]["table"].pop(0)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(d))
    code, _, err = run(capsys, "check", str(p))
    assert code == 1
    assert "missing cell (a='+1', b='+1', x='0', y='0')" in err


def test_check_unnormalized(capsys, tmp_path):
    d = json.loads(GOLDEN.read_text())
    del d["ont_model"]
    d["experiment"]["table"][0]["p"] = "3/4"  # column (0, 0) now sums to 5/4
    p = tmp_path / "heavy.json"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "check", str(p))
    assert code == 2
    assert "FAIL normalization" in out and "5/4" in out


def test_check_parse_error(capsys, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{\n  nope\n}")
    code, _, err = run(capsys, "check", str(p))
    assert code == 1 and "line 2" in err


def test_certify_time_symmetry(capsys, maudlin_file):
    code, out, _ = run(capsys, "certify", "--kind", "time-symmetry", maudlin_file)
    assert code == 0
    assert out.strip() == "ViolationExhaustive (24 refuted of 24)"


def test_certify_writes_json(capsys, maudlin_file, tmp_path):
    cert = tmp_path / "cert.json"
    code, _, _ = run(capsys, "certify", "--kind", "time-symmetry", maudlin_file, "-o", str(cert))
    assert code == 0
    d = json.loads(cert.read_text())
    assert list(d) == ["kind", "inputs", "steps", "scalars"]
    assert d["scalars"]["bijections_refuted"] == 24


def test_certify_chsh(capsys, maudlin_file):
    code, out, _ = run(capsys, "certify", "--kind", "chsh", "--settings", "0,1,0,1", maudlin_file)
    assert code == 0
    assert "1/2 + 1/1*sqrt3" in out and "exceeds 2: true" in out


def test_certify_chsh_bad_settings(capsys, maudlin_file):
    assert run(capsys, "certify", "--kind", "chsh", "--settings", "0,1", maudlin_file)[0] == 1
    assert run(capsys, "certify", "--kind", "chsh", "--settings", "0,1,0,7", maudlin_file)[0] == 1


def test_certify_classical_witness(capsys, classical_file):
    code, out, _ = run(capsys, "certify", "--kind", "time-symmetry", classical_file)
    assert code == 0
    assert out.startswith("TimeReverseWitness") and "['1', '2']" in out


def test_certify_lemma(capsys, classical_file, maudlin_file):
    code, out, _ = run(capsys, "certify", "--kind", "lemma", classical_file)
    assert code == 0 and out.startswith("LemmaVerified")
    code, _, err = run(capsys, "certify", "--kind", "lemma", maudlin_file)
    assert code == 3 and "hypothesis is unmet" in err


def test_certify_noncontextuality(capsys, maudlin_file, classical_file):
    assert run(capsys, "certify", "--kind", "noncontextuality", maudlin_file)[1].startswith("Contextual")
    assert run(capsys, "certify", "--kind", "noncontextuality", classical_file)[1].startswith("Noncontextual")


def test_cap_flag_and_env(capsys, maudlin_file, monkeypatch):
    code, _, err = run(capsys, "certify", "--kind", "time-symmetry", maudlin_file, "--cap", "3")
    assert code == 3 and "cap 3" in err
    monkeypatch.setenv("ONTOSYMM_CAP", "3")
    assert run(capsys, "certify", "--kind", "time-symmetry", maudlin_file)[0] == 3
    # the flag wins over the environment
    assert run(capsys, "certify", "--kind", "time-symmetry", maudlin_file, "--cap", "4")[0] == 0
    monkeypatch.setenv("ONTOSYMM_CAP", "lots")
    assert run(capsys, "certify", "--kind", "time-symmetry", maudlin_file)[0] == 1


def test_float_mode(capsys, maudlin_file):
    code, out, _ = run(capsys, "check", maudlin_file, "--mode", "float")
    assert code == 0
    code, out, _ = run(capsys, "certify", "--kind", "time-symmetry", maudlin_file, "--mode", "float")
    assert code == 0 and "24 refuted" in out


def test_reverse_search(capsys, maudlin_file, classical_file):
    code, out, _ = run(capsys, "reverse-search", maudlin_file)
    assert code == 0 and out.startswith("0 of 24")
    code, out, _ = run(capsys, "reverse-search", classical_file, "--format", "json")
    assert json.loads(out)["bijections"][0] == [["1", "1"], ["2", "2"]]


def test_build_bb(capsys, tmp_path):
    dirs = tmp_path / "dirs.json"
    dirs.write_text(json.dumps([[0, 0, 1], [1, 0, 0]]))
    code, out, _ = run(capsys, "build", "bb", "--directions", str(dirs))
    assert code == 0
    table = json.loads(out)["experiment"]["table"]
    for rec in table:
        if rec["x"] != rec["y"]:
            assert rec["p"] == "1/4 + 0/1*sqrt3"
        else:
            assert rec["p"] in ("1/2 + 0/1*sqrt3", "0/1 + 0/1*sqrt3")


def test_build_bb_inexact_direction(capsys, tmp_path):
    dirs = tmp_path / "dirs.json"
    dirs.write_text(json.dumps([[0.6, 0, 0.8]]))
    assert run(capsys, "build", "bb", "--directions", str(dirs))[0] == 1
    assert run(capsys, "build", "bb", "--directions", str(dirs), "--mode", "float")[0] == 0


def test_usage_errors(capsys):
    assert run(capsys, "build", "nonsense")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "check", "/no/such/file.json")[0] == 1


def test_check_partner_label_search(capsys, maudlin_file, tmp_path):
    d = json.loads(GOLDEN.read_text())
    del d["ont_model"]
    d["experiment"]["omega_b"] = ["-1", "+1"]  # same cells, labels listed the other way round
    p = tmp_path / "renamed.json"
    p.write_text(json.dumps(d))
    code, out, _ = run(capsys, "check", maudlin_file, "--partner", str(p))
    assert code == 2 and "FAIL operational_time_reverse" in out
    code, out, _ = run(capsys, "check", maudlin_file, "--partner", str(p), "--search-labels")
    assert code == 0 and "PASS operational_time_reverse" in out
