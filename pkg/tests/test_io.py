import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from logitplay.dlfp import SaddlePoint, VerificationReport, run_dlfp, uniform_state, verify_recursions
from logitplay.errors import InvalidInputError, ParseError
from logitplay.game import RegularizedGame
from logitplay.io import (
    AGGREGATE_COLUMNS,
    CHECK_COLUMNS,
    TRACE_COLUMNS,
    builtin_payoff,
    emit_report,
    fmt,
    load_payoff,
    parse_payoff_csv,
    save_payoff,
    sibling,
    write_json,
)
from logitplay.lfp import monte_carlo
from logitplay.schedules import Constant, RationalQ


def test_csv_matching_pennies():
    np.testing.assert_array_equal(parse_payoff_csv("1,-1\n-1,1"), [[1, -1], [-1, 1]])
    np.testing.assert_array_equal(parse_payoff_csv("1,-1\n-1,1\n\n"), [[1, -1], [-1, 1]])


def test_builtins():
    np.testing.assert_array_equal(load_payoff("matching-pennies"), [[1, -1], [-1, 1]])
    assert load_payoff("zero:3×4").shape == (3, 4) and not load_payoff("zero:3x4").any()
    r = load_payoff("random:5x7:42")
    assert r.shape == (5, 7) and np.all(np.abs(r) <= 1)
    np.testing.assert_array_equal(r, np.random.default_rng(42).uniform(-1, 1, (5, 7)))
    assert builtin_payoff("no-such-game.csv") is None


@pytest.mark.parametrize("name", ["zero:0x3", "random:3x3", "zero:abc"])
def test_malformed_builtins(name):
    with pytest.raises(InvalidInputError):
        load_payoff(name)


@pytest.mark.parametrize(
    "text, row, column",
    [
        ("1,2\n3", 2, None),
        ("", 1, None),
        ("1,2\n3,x", 2, 2),
        ("nan,1", 1, 1),
        ("1,2\n\n3,4", 2, None),
    ],
)
def test_parse_errors_locate_the_problem(text, row, column):
    with pytest.raises(ParseError) as info:
        parse_payoff_csv(text)
    assert info.value.row == row and info.value.column == column


def test_missing_file(tmp_path):
    with pytest.raises(InvalidInputError):
        load_payoff(tmp_path / "absent.csv")


@given(arrays(np.float64, st.tuples(st.integers(1, 5), st.integers(1, 5)), elements=st.floats(-1e6, 1e6)))
def test_payoff_round_trip_is_exact(tmp_path_factory, A):
    path = tmp_path_factory.mktemp("rt") / "A.csv"
    save_payoff(A, path)
    np.testing.assert_array_equal(load_payoff(path), A)


def test_fmt_is_shortest_round_trip():
    assert fmt(0.1) == "0.1" and fmt(np.nan) == "" and fmt(np.float64(1e-300)) == "1e-300"
    x = 0.1 + 0.2
    assert float(fmt(x)) == x and len(fmt(x).replace(".", "").lstrip("0")) >= 15


def read_rows(path):
    return [line.split(",") for line in path.read_text().splitlines()]


def test_empty_report_has_header_only(tmp_path):
    path = emit_report(VerificationReport([]), tmp_path / "r.csv")
    assert read_rows(path) == [list(CHECK_COLUMNS)]


def test_trace_with_two_steps_has_three_rows(tmp_path):
    game = RegularizedGame(np.array([[1.0, -1.0], [-1.0, 1.0]]), 0.5)
    tr = run_dlfp(game, (np.array([1.0, 0.0]), np.array([0.0, 1.0])), RationalQ(1), 2)
    rows = read_rows(emit_report(tr, tmp_path / "t.csv"))
    assert rows[0] == list(TRACE_COLUMNS)
    assert [r[0] for r in rows[1:]] == ["0", "1", "2"]
    assert rows[1][3] == "" and float(rows[2][2]) == tr.gaps[1]


def test_trace_files_are_byte_identical(tmp_path):
    game = RegularizedGame(np.random.default_rng(0).uniform(-1, 1, (4, 4)), 0.3)
    a = emit_report(run_dlfp(game, uniform_state(game), Constant(0.1), 50), tmp_path / "a.csv")
    b = emit_report(run_dlfp(game, uniform_state(game), Constant(0.1), 50), tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    its = [int(r[0]) for r in read_rows(a)[1:]]
    assert its == sorted(set(its))


def test_checks_file(tmp_path):
    game = RegularizedGame(np.random.default_rng(0).uniform(-1, 1, (3, 3)), 0.3)
    report = verify_recursions(game, run_dlfp(game, uniform_state(game), RationalQ(2), 20))
    rows = read_rows(emit_report(report, tmp_path / "c.csv"))
    assert [r[0] for r in rows[1:]] == ["gap_consistency", "contraction", "additive", "rate"]
    assert all(r[3] == "0" for r in rows[1:])


def test_aggregate_file(tmp_path):
    game = RegularizedGame(np.zeros((2, 2)), 1.0)
    sp = SaddlePoint(np.full(2, 0.5), np.full(2, 0.5), 0.0, 0.0)
    agg = monte_carlo(game, RationalQ(2), 30, 4, 0, sp, (2.0, 2.0), 5, checkpoint_stride=10)
    rows = read_rows(emit_report(agg, tmp_path / "m.csv"))
    assert rows[0] == list(AGGREGATE_COLUMNS)
    assert [r[0] for r in rows[1:]] == ["0", "10", "20", "30"]


def test_emit_rejects_unknown(tmp_path):
    with pytest.raises(InvalidInputError):
        emit_report({"a": 1}, tmp_path / "x.csv")


def test_json_writer(tmp_path):
    path = write_json({"b": np.array([1.0, np.nan]), "a": np.int64(3)}, tmp_path / "s.json")
    assert json.loads(path.read_text()) == {"a": 3, "b": [1.0, None]}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')


def test_sibling_names():
    assert sibling("out/run.csv", "gfw").as_posix() == "out/run.gfw.csv"
    assert sibling("run.csv", "summary", ".json").name == "run.summary.json"
