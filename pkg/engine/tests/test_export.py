import json

import pytest

from errors import DomainError
from export import flatten_pairs, read_records, render, write_records

RECORDS = [
    {"family": "2l-gon", "theta": 0.5235987755982988, "phi": 0.0, "u": 1 / 3, "eigenvalues": [[1.5, 0.0], [-0.25, 2.0]]},
    {"family": "prism", "theta": 0.0, "phi": 0.6154797086703873, "u": 2.0 ** 0.5, "eigenvalues": [[0.1, -0.2], [3.0, 0.0]]},
]


def test_flatten_pairs():
    flat = flatten_pairs(RECORDS[0])
    assert "eigenvalues" not in flat
    assert flat["eigenvalues1_re"] == -0.25
    assert flat["eigenvalues1_im"] == 2.0
    assert flatten_pairs({"a": 1}) == {"a": 1}


def test_csv_keeps_full_precision(tmp_path):
    path = tmp_path / "cc.csv"
    write_records(RECORDS, "csv", str(path))
    rows = read_records(str(path))
    assert len(rows) == 2
    assert rows[0]["u"] == RECORDS[0]["u"]
    assert rows[1]["phi"] == RECORDS[1]["phi"]
    assert rows[1]["eigenvalues0_im"] == -0.2


def test_csv_column_order():
    text = render(RECORDS, "csv", columns=["family", "u", "phi"])
    assert text.splitlines()[0] == "family,u,phi"


def test_json_output(tmp_path):
    path = tmp_path / "cc.json"
    text = write_records(RECORDS, "json", str(path))
    assert json.loads(text) == RECORDS
    assert read_records(str(path)) == RECORDS


def test_stdout(capsys):
    write_records(RECORDS[:1], "json")
    assert json.loads(capsys.readouterr().out)[0]["family"] == "2l-gon"


def test_unknown_format(tmp_path):
    with pytest.raises(DomainError):
        render(RECORDS, "xml")
    with pytest.raises(DomainError):
        read_records(str(tmp_path / "cc.txt"))
