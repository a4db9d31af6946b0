import math

import numpy as np
import pytest

from wavemap.series_io import format_value, read_csv, read_series, write_csv


def test_format_seventeen_digits():
    assert format_value(0.1) == "0.10000000000000001"
    assert float(format_value(1 / 3)) == 1 / 3
    assert format_value(3) == "3" and format_value(float("nan")) == "nan"
    assert format_value(np.float64(2.5)) == "2.5" and format_value("x_axis") == "x_axis"


def test_write_read(tmp_path):
    path = tmp_path / "o.csv"
    rows = [(0.0, 1.0, -1.0, 1.0, float("nan"), float("nan")), (0.1, 0.9, -8.0, 16.0, 1.0, 1.0)]
    write_csv(path, ("t", "w_origin", "trace_H", "det_H", "s_gauss", "s_mean"), rows, "test hash=00")
    text = path.read_text().splitlines()
    assert text[0] == "# wavemap test hash=00"
    assert text[1].startswith("t[time],w_origin[1],trace_H[1/length^2]")
    cols, data = read_csv(path)
    assert cols[0] == "t" and len(data) == 2
    ser = read_series(path)
    assert ser.times == [0.1] and ser.s_values == [1.0]


def test_two_column_series(tmp_path):
    path = tmp_path / "s.csv"
    path.write_text("t,s\n0.1,0.5\n0.2,0.4\n")
    assert read_series(path).s_values == [0.5, 0.4]
    bad = tmp_path / "b.csv"
    bad.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        read_series(bad)
    empty = tmp_path / "e.csv"
    empty.write_text("# nothing\n")
    with pytest.raises(ValueError):
        read_csv(empty)
