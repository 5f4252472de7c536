import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shuntdamp.cli import SPECTRA_COLUMNS, SWEEP_COLUMNS, TIMELINE_COLUMNS
from shuntdamp.io import emit_csv, format_value, read_csv


def test_header_only_file(tmp_path):
    p = tmp_path / "a.csv"
    emit_csv([], ("x", "y"), p)
    assert p.read_bytes() == b"x,y\n"


def test_line_endings_are_lf(tmp_path):
    p = tmp_path / "a.csv"
    emit_csv([(1, 2.5), (3, True)], ("x", "y"), p)
    assert p.read_bytes() == b"x,y\n1,2.5\n3,1\n"


def test_format_value():
    assert format_value(np.bool_(False)) == "0"
    assert format_value(np.int64(7)) == "7"
    assert format_value(1.0 / 3.0) == "0.333333333"
    assert format_value(float("nan")) == "nan"
    assert format_value(float("-inf")) == "-inf"
    assert format_value("static") == "static"


def test_arity_mismatch(tmp_path):
    with pytest.raises(ValueError, match="row 0"):
        emit_csv([(1,)], ("x", "y"), tmp_path / "a.csv")


def test_io_error_names_the_path(tmp_path):
    target = tmp_path / "missing" / "a.csv"
    with pytest.raises(OSError, match="missing"):
        emit_csv([], ("x",), target)


def test_golden_headers():
    assert SWEEP_COLUMNS == ("freq_hz", "tr_db_free", "tr_db_shunted", "delta_l_tr_db")
    assert TIMELINE_COLUMNS == ("run", "time_s", "r0_ohm", "r1_ohm", "k_eff_ratio", "arg_k_eff_rad",
                                "suppression_db", "dominant_hz", "converged")
    assert SPECTRA_COLUMNS == ("run", "time_s", "freq_hz", "force_free_n", "force_shunted_n")


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(st.tuples(finite, finite), max_size=20))
def test_roundtrip_to_nine_digits(tmp_path_factory, rows):
    p = tmp_path_factory.mktemp("rt") / "a.csv"
    emit_csv(rows, ("a", "b"), p)
    header, back = read_csv(p)
    assert header == ["a", "b"] and len(back) == len(rows)
    for orig, got in zip(rows, back):
        for x, y in zip(orig, got):
            assert math.isclose(x, y, rel_tol=5e-9, abs_tol=0.0) or x == y
