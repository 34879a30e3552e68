import json
from pathlib import Path

import pytest

from ontosymm import modelfile
from ontosymm.modelfile import ParseError, SchemaError, dumps, loads
from ontosymm.numerics import FLOAT
from ontosymm.quantum import build_classical_control

GOLDEN = Path(__file__).parent / "golden" / "maudlin.json"


def test_maudlin_roundtrip(maudlin):
    text = dumps(*maudlin)
    mf = loads(text)
    assert mf.experiment == maudlin[0]
    assert mf.model == maudlin[1]
    assert dumps(mf.experiment, mf.model) == text


def test_golden_roundtrip_byte_identical():
    text = GOLDEN.read_text()
    mf = loads(text)
    assert dumps(mf.experiment, mf.model) == text


def test_experiment_only_file(classical2):
    text = dumps(classical2[0])
    mf = loads(text)
    assert mf.model is None
    assert mf.experiment == classical2[0]


def test_parse_error_reports_line():
    with pytest.raises(ParseError, match="line 2"):
        loads('{"experiment":\n  [1,, 2]}')


def test_missing_cell_named():
    d = json.loads(GOLDEN.read_text())
    d["experiment"]["table"].pop(5)
    with pytest.raises(SchemaError, match="missing cell") as exc:
        loads(json.dumps(d))
    assert "(a='+1', b='-1', x='0', y='1')" in str(exc.value)


def test_duplicate_cell_rejected():
    d = json.loads(GOLDEN.read_text())
    d["experiment"]["table"].append(d["experiment"]["table"][0])
    with pytest.raises(SchemaError):
        loads(json.dumps(d))


def test_unknown_top_level_key():
    d = json.loads(GOLDEN.read_text())
    d["extra"] = 1
    with pytest.raises(SchemaError):
        loads(json.dumps(d))


def test_wrong_field_type():
    d = json.loads(GOLDEN.read_text())
    d["experiment"]["omega_a"] = "+1"
    with pytest.raises(SchemaError):
        loads(json.dumps(d))


def test_float_mode_load():
    mf = loads(GOLDEN.read_text(), FLOAT)
    assert mf.experiment.mode == FLOAT
    assert abs(mf.experiment.p("+1", "+1", "0", "1").value - (1 + 3**0.5 / 2) / 4) < 1e-12


def test_decimal_probabilities_only_in_float_mode():
    e, _ = build_classical_control(2)
    d = modelfile.experiment_to_dict(e)
    for rec in d["table"]:
        rec["p"] = 0.5 if rec["a"] == rec["b"] else 0
    text = json.dumps({"experiment": d})
    with pytest.raises(modelfile.ModelFileError):
        loads(text)
    assert loads(text, FLOAT).experiment.mode == FLOAT


def test_canonical_json_sorted():
    assert modelfile.canonical_json({"b": 1, "a": [1]}) == '{\n  "a": [\n    1\n  ],\n  "b": 1\n}\n'
