"""File format tests."""

import csv
import io
import json

import numpy as np
import pytest

from core.errors import ConfigInvalidError, FieldMismatchError, FormatError, IoFailureError
from core.mat2 import Mat2
from core.setalg import MatSet, indicator
from core.utils import (
    emit_report,
    format_set,
    load_json_config,
    load_set_source,
    parse_parameters,
    parse_set,
    read_set_file,
    read_vertex_file,
    write_freq_table,
    write_set_file,
    write_vertex_file,
)
from models import BoundEntry, ExperimentReport


@pytest.fixture
def report():
    return ExperimentReport(
        experiment="moments",
        q=3,
        seeds=[7, 8],
        measured={"energy": 1234, "ratio": 1 / 3},
        bounds={"cs": BoundEntry(value=2.0, cites="Cauchy-Schwarz")},
        ratios={"cs": 2 / 3},
        pass_flags={"ok": True},
        rows=[{"trial": 0, "energy": 10}, {"trial": 1, "energy": 12, "extra": 0.5}],
    )


def test_set_file_round_trip(tmp_path, f4):
    A = MatSet.from_matrices(f4, [Mat2(1, 2, 3, 0), Mat2.identity()])
    path = tmp_path / "a.txt"
    write_set_file(path, A)
    assert path.read_text().splitlines()[0] == "q=2^2"
    assert read_set_file(path) == A


def test_format_set_lines(f2):
    text = format_set(MatSet.from_matrices(f2, [Mat2(0, 1, 1, 0)]))
    assert text == "q=2^1\n0,1,1,0\n"


@pytest.mark.parametrize("text", ["", "1,0,0,1\n", "q=6\n", "q=3\n1,2,3,0\n", "q=3\n1,2\n"])
def test_parse_set_rejects(text):
    with pytest.raises(FormatError):
        parse_set(text)


def test_missing_file(tmp_path):
    with pytest.raises(IoFailureError):
        read_set_file(tmp_path / "missing.txt")


def test_vertex_file(tmp_path, f2):
    path = tmp_path / "v.txt"
    write_vertex_file(path, np.array([5, 3, 5]))
    assert list(read_vertex_file(path, f2)) == [3, 5]
    path.write_text("4096\n")
    with pytest.raises(FormatError):
        read_vertex_file(path, f2)
    path.write_text("x\n")
    with pytest.raises(FormatError):
        read_vertex_file(path, f2)


def test_freq_table(tmp_path, f2):
    path = tmp_path / "r.csv"
    write_freq_table(path, indicator(MatSet(f2, [3, 9])))
    assert path.read_text() == "lambda_index,count\n3,1\n9,1\n"


def test_parse_parameters():
    assert parse_parameters("X=0,1; seed=4") == {"X": "0,1", "seed": "4"}
    assert parse_parameters("") == {}
    with pytest.raises(ConfigInvalidError):
        parse_parameters("X")


def test_set_sources(tmp_path, f3):
    assert len(load_set_source("construction:FullGL2", f3)) == 48
    assert len(load_set_source("construction:X23Restricted:X=0,1", f3)) == 54
    random_set = load_set_source("random:10:4:gl2", f3)
    assert len(random_set) == 10 and random_set.is_invertible()
    assert random_set == load_set_source("random:10:4:gl2", f3)
    path = tmp_path / "a.txt"
    write_set_file(path, random_set)
    assert load_set_source(str(path), f3) == random_set


def test_set_source_errors(tmp_path, f2, f3):
    with pytest.raises(ConfigInvalidError):
        load_set_source("construction:Nope", f3)
    with pytest.raises(ConfigInvalidError):
        load_set_source("random:many", f3)
    path = tmp_path / "a.txt"
    write_set_file(path, MatSet.full(f2))
    with pytest.raises(FieldMismatchError):
        load_set_source(str(path), f3)


def test_json_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"trials": 3}')
    assert load_json_config(path) == {"trials": 3}
    path.write_text("[1]")
    with pytest.raises(ConfigInvalidError):
        load_json_config(path)
    path.write_text("{")
    with pytest.raises(ConfigInvalidError):
        load_json_config(path)


def test_json_report_is_deterministic(report):
    text = emit_report(report)
    assert text == emit_report(report.model_copy())
    payload = json.loads(text)
    assert list(payload) == sorted(payload)
    assert payload["measured"]["ratio"] == 0.333333333333
    assert payload["bounds"]["cs"]["constant"] == 1.0


def test_csv_report(report, tmp_path):
    path = tmp_path / "r.csv"
    text = emit_report(report, "csv", path)
    assert path.read_text() == text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 2
    assert rows[0]["extra"] == ""


def test_csv_summary_row(report):
    summary = report.model_copy(update={"rows": []})
    rows = list(csv.DictReader(io.StringIO(emit_report(summary, "csv"))))
    assert len(rows) == 1
    assert rows[0]["ratio_cs"] == "0.666666666667"


def test_unknown_format(report):
    with pytest.raises(ConfigInvalidError):
        emit_report(report, "xml")
