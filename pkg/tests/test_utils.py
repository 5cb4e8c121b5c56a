import math

import pytest

from utils import Utils


def test_format_value():
    assert Utils.format_value(0.1) == "0.10000000000000001"
    assert Utils.format_value(math.nan) == "nan"
    assert Utils.format_value(True) == "true"
    assert Utils.format_value(None) == ""
    assert Utils.format_value(3) == "3"


def test_write_csv(tmp_path):
    path = tmp_path / "sub" / "out.csv"
    Utils.write_csv(str(path), ["a", "b"], [[1, 0.5], [2, None]], header=["first", ""])
    assert path.read_text() == "# first\n#\na,b\n1,0.5\n2,\n"
    with pytest.raises(ValueError):
        Utils.write_csv(str(path), ["a", "b"], [[1]])


def test_save_svg_is_deterministic(tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    for path in (a, b):
        Utils.save_svg([0, 1, 2], [1.0, 0.5, 0.25], str(path), "x", "y", "t", hlines=(0.0,))
    assert a.read_bytes() == b.read_bytes()
    assert "<dc:date>" not in a.read_text()
