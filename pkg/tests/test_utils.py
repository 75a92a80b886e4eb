# tests/test_utils.py

import pytest
import sys
import os

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def test_philox_prefix_stable():
    """Test a longer draw extends a shorter one"""
    from dlab.utils.seeding import philox_generator

    short = philox_generator(42, 1).random(10)
    long = philox_generator(42, 1).random(1000)
    assert np.array_equal(short, long[:10])


def test_streams_are_separate():
    """Test different paths give different streams"""
    from dlab.utils.seeding import derive_seed, philox_generator

    assert derive_seed(5, 1) != derive_seed(5, 2)
    assert derive_seed(5, 2, 0) != derive_seed(5, 2, 1)
    assert derive_seed(5, 2, 3) == derive_seed(5, 2, 3)
    assert not np.array_equal(philox_generator(5, 1).random(4), philox_generator(6, 1).random(4))


def test_moments_merge_matches_whole():
    """Test merged block moments equal moments of the whole sample"""
    from dlab.utils.stats import Moments, merge_all

    values = np.random.default_rng(3).normal(size=1001)
    whole = Moments.from_values(values)
    merged = merge_all(Moments.from_values(values[i:i + 100]) for i in range(0, 1001, 100))
    assert merged.count == whole.count
    assert merged.mean == pytest.approx(whole.mean, rel=1e-12)
    assert merged.variance == pytest.approx(float(np.var(values, ddof=1)), rel=1e-10)


def test_moments_empty():
    """Test empty samples merge as identity"""
    from dlab.utils.stats import Moments

    empty = Moments.from_values(np.empty(0))
    single = Moments.from_values(np.array([2.0]))
    assert empty.merge(single) == single
    assert single.stderr == 0.0


def test_block_ranges():
    """Test blocks cover the range in order"""
    from dlab.utils.parallel import block_ranges

    assert block_ranges(5, 2) == [(0, 0, 2), (1, 2, 4), (2, 4, 5)]
    assert block_ranges(0, 4) == []


def test_map_ordered_keeps_order(monkeypatch):
    """Test results keep input order on several workers"""
    from dlab.core.config import get_settings
    from dlab.utils.parallel import map_ordered

    monkeypatch.setenv("DLAB_THREADS", "4")
    get_settings.cache_clear()
    try:
        assert map_ordered(lambda x: x * x, range(50)) == [x * x for x in range(50)]
    finally:
        get_settings.cache_clear()


def test_format_cell():
    """Test cell rendering"""
    from dlab.utils.csv_output import format_cell

    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(np.int64(7)) == "7"
    assert format_cell(0.1) == "0.1"
    assert format_cell((1, 2, 3)) == "1 2 3"


def test_write_csv_atomic(tmp_path):
    """Test the preamble, header and rows of a written CSV"""
    from dlab.utils.csv_output import read_csv_rows, write_csv_atomic

    path = tmp_path / "out.csv"
    count = write_csv_atomic(str(path), ["first", "second"], ["a", "b"], [[1, 0.5], [2, None]])
    assert count == 2
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[:2] == ["# first", "# second"]
    assert read_csv_rows(str(path)) == [["a", "b"], ["1", "0.5"], ["2", ""]]
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]


def test_write_csv_bad_directory(tmp_path):
    """Test writing into a missing directory raises OutputWriteError"""
    from dlab.utils.csv_output import write_csv_atomic
    from dlab.core.exceptions import OutputWriteError

    with pytest.raises(OutputWriteError):
        write_csv_atomic(str(tmp_path / "missing" / "out.csv"), [], ["a"], [[1]])


def test_power_iteration_converges():
    """Test the top eigenvalue of a 2x2 matrix"""
    from dlab.utils.linalg import power_iteration

    matrix = np.array([[2.0, 1.0], [1.0, 1.0]])
    value, vector, _ = power_iteration(matrix)
    assert value == pytest.approx((3 + np.sqrt(5)) / 2, rel=1e-9)
    assert np.linalg.norm(vector) == pytest.approx(1)


def test_power_iteration_cap():
    """Test hitting the iteration cap raises ConvergenceError with the last iterate"""
    from dlab.utils.linalg import power_iteration
    from dlab.core.exceptions import ConvergenceError

    matrix = np.array([[2.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ConvergenceError) as info:
        power_iteration(matrix, tol=1e-15, max_iter=1)
    assert info.value.last_iterate is not None
    assert info.value.last_value > 0


def test_settings_from_environment(monkeypatch):
    """Test DLAB_ environment variables reach the settings"""
    from dlab.core.config import get_settings

    monkeypatch.setenv("DLAB_EXACT_MOMENT_MAX_N", "64")
    get_settings.cache_clear()
    try:
        assert get_settings().exact_moment_max_n == 64
    finally:
        get_settings.cache_clear()


def test_settings_invalid_environment(monkeypatch):
    """Test invalid DLAB_THREADS values raise ValidationError naming the variable"""
    from dlab.core.config import get_settings
    from dlab.core.exceptions import ValidationError

    try:
        for value in ("0", "abc"):
            monkeypatch.setenv("DLAB_THREADS", value)
            get_settings.cache_clear()
            with pytest.raises(ValidationError) as info:
                get_settings()
            assert "DLAB_THREADS" in str(info.value)
            assert info.value.exit_code == 2
    finally:
        get_settings.cache_clear()
