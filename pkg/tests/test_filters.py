import math

import numpy as np
import pytest

from tsds.errors import BadArg
from tsds.filters import (
    filter_block,
    filter_exclude_missing,
    filter_replace_missing,
    filter_stride,
    filter_thin,
)
from tsds.table import ResultTable


def make_table(seed=0, n=None, k=1, fill=None, nan_fraction=0.1, fill_fraction=0.1):
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(0, 200))
    times = np.sort(rng.uniform(0, 1000, size=n))
    values = rng.normal(size=(n, k))
    values[rng.random((n, k)) < nan_fraction] = np.nan
    if fill is not None:
        values[rng.random((n, k)) < fill_fraction] = fill
    return ResultTable(times, {"v": values},
                       {"v": fill if fill is not None else math.nan})


def tables_equal(a: ResultTable, b: ResultTable) -> bool:
    if not np.array_equal(a.times, b.times, equal_nan=True):
        return False
    if set(a.columns) != set(b.columns):
        return False
    return all(np.array_equal(a.columns[n], b.columns[n], equal_nan=True)
               for n in a.columns)


# --- stride ----------------------------------------------------------------------

def test_stride_keeps_every_nth_row():
    t = make_table(seed=1, n=10)
    out = filter_stride(t, 3)
    # reference: python slicing
    assert np.array_equal(out.times, t.times[::3])
    assert np.array_equal(out.columns["v"], t.columns["v"][::3], equal_nan=True)
    assert out.n_rows == 4  # rows 0, 3, 6, 9


def test_stride_one_is_identity():
    t = make_table(seed=2, n=17)
    assert tables_equal(filter_stride(t, 1), t)


@pytest.mark.parametrize("seed", range(8))
def test_stride_length_is_ceil(seed):
    t = make_table(seed=seed)
    for n in (1, 2, 3, 7):
        out = filter_stride(t, n)
        assert out.n_rows == math.ceil(t.n_rows / n)
        assert tables_equal(out, t.take(np.arange(t.n_rows)[::n]))


def test_stride_rejects_bad_step():
    with pytest.raises(BadArg):
        filter_stride(make_table(n=5), 0)


# --- thin ------------------------------------------------------------------------

def test_thin_formula_cases():
    # len 1000, n 100 -> stride 10 -> 100 rows
    assert filter_thin(make_table(seed=3, n=1000, nan_fraction=0), 100).n_rows == 100
    # len 50, n 100 -> already small enough
    t = make_table(seed=4, n=50, nan_fraction=0)
    assert tables_equal(filter_thin(t, 100), t)
    # len 1001, n 100 -> stride ceil(1001/100)=11 -> ceil(1001/11)=91 rows
    out = filter_thin(make_table(seed=5, n=1001, nan_fraction=0), 100)
    assert out.n_rows == 91


@pytest.mark.parametrize("seed", range(10))
def test_thin_result_size_bounds(seed):
    rng = np.random.default_rng(seed + 1000)
    n_target = int(rng.integers(1, 300))
    t = make_table(seed=seed, n=int(rng.integers(0, 2000)))
    out = filter_thin(t, n_target)
    if t.n_rows <= n_target:
        assert out.n_rows == t.n_rows
    else:
        assert n_target / 2 <= out.n_rows <= n_target


# --- replace / exclude ---------------------------------------------------------------

def test_replace_fill_with_nan():
    t = ResultTable([0, 1], {"v": [-999.0, 2.0]}, {"v": -999.0})
    out = filter_replace_missing(t, math.nan)
    assert np.isnan(out.columns["v"][0, 0])
    assert out.columns["v"][1, 0] == 2.0


def test_replace_targets_only_the_fill_value():
    # NaN under a non-NaN fill is NOT replaced
    t = ResultTable([0, 1, 2], {"v": [-999.0, math.nan, 5.0]}, {"v": -999.0})
    out = filter_replace_missing(t, 0.0)
    assert out.columns["v"][0, 0] == 0.0
    assert math.isnan(out.columns["v"][1, 0])
    assert out.columns["v"][2, 0] == 5.0


def test_replace_nan_fill_replaces_nans():
    t = ResultTable([0, 1], {"v": [math.nan, 2.0]}, {"v": math.nan})
    out = filter_replace_missing(t, -1.0)
    assert np.array_equal(out.columns["v"].ravel(), [-1.0, 2.0])


def test_replace_does_not_mutate_input():
    t = ResultTable([0], {"v": [-999.0]}, {"v": -999.0})
    filter_replace_missing(t, 0.0)
    assert t.columns["v"][0, 0] == -999.0


def test_exclude_any_component_rule():
    t = ResultTable([0, 1], {"v": [[1.0, math.nan, 3.0], [4.0, 5.0, 6.0]]}, {"v": math.nan})
    out = filter_exclude_missing(t)
    assert out.n_rows == 1
    assert np.array_equal(out.columns["v"][0], [4.0, 5.0, 6.0])


def test_exclude_drops_fill_sentinels_too():
    t = ResultTable([0, 1, 2], {"v": [-999.0, 1.0, math.nan]}, {"v": -999.0})
    out = filter_exclude_missing(t)
    assert out.n_rows == 1 and out.columns["v"][0, 0] == 1.0


@pytest.mark.parametrize("seed", range(6))
def test_replace_then_exclude_composition_oracle(seed):
    t = make_table(seed=seed, n=60, fill=-999.0)
    replaced = filter_replace_missing(t, math.nan)
    composed = filter_exclude_missing(replaced)
    # two-pass reference: rows whose value is neither NaN nor the fill survive
    v = t.columns["v"][:, 0]
    keep = ~(np.isnan(v) | (v == -999.0))
    assert np.array_equal(composed.times, t.times[keep])


# --- block aggregates -----------------------------------------------------------------

def reference_block(times, values, fill, width, kind):
    """Brute-force tumbling-window aggregate using the interval definition."""
    t0 = times[0]
    n_windows = 0
    for t in times:
        i = 0
        while not (t0 + i * width <= t < t0 + (i + 1) * width):
            i += 1
        n_windows = max(n_windows, i + 1)
    out_t, out_v, out_c = [], [], []
    for i in range(n_windows):
        out_t.append(t0 + (i + 0.5) * width)
        contributors = []
        for t, v in zip(times, values):
            if t0 + i * width <= t < t0 + (i + 1) * width:
                if not (math.isnan(v) or v == fill):
                    contributors.append(v)
        out_c.append(len(contributors))
        if kind == "count":
            # the count IS the value; an empty window counts 0, not NaN
            out_v.append(float(len(contributors)))
        elif not contributors:
            out_v.append(math.nan)
        elif kind == "avg":
            out_v.append(sum(contributors) / len(contributors))
        elif kind == "min":
            out_v.append(min(contributors))
        elif kind == "max":
            out_v.append(max(contributors))
    return np.array(out_t), np.array(out_v), np.array(out_c)


def test_block_average_documented_example():
    t = ResultTable([0.0, 1.0, 2.0, 3.0], {"v": [1.0, 2.0, math.nan, 4.0]}, {"v": math.nan})
    out = filter_block(t, 2.0, "avg")
    assert np.array_equal(out.columns["v"].ravel(), [1.5, 4.0])
    assert np.array_equal(out.count_columns["v"].ravel(), [2, 1])
    assert np.array_equal(out.times, [1.0, 3.0])


def test_bincount_equals_count_column_of_binavg():
    t = make_table(seed=11, n=80, fill=-5.0)
    avg = filter_block(t, 7.0, "avg")
    cnt = filter_block(t, 7.0, "count")
    assert np.array_equal(cnt.columns["v"], avg.count_columns["v"].astype(float))


def test_empty_windows_emit_nan_with_zero_count():
    t = ResultTable([0.0, 5.0], {"v": [1.0, 2.0]}, {"v": math.nan})
    out = filter_block(t, 1.0, "avg")
    assert out.n_rows == 6
    assert np.array_equal(out.count_columns["v"].ravel(), [1, 0, 0, 0, 0, 1])
    assert np.all(np.isnan(out.columns["v"].ravel()[1:5]))


@pytest.mark.parametrize("kind", ["avg", "min", "max", "count"])
@pytest.mark.parametrize("seed", range(5))
def test_block_matches_reference(kind, seed):
    t = make_table(seed=seed, n=50, fill=-999.0)
    if t.n_rows == 0:
        return
    width = [0.5, 3.0, 40.0, 1000.0, 7.25][seed]
    out = filter_block(t, width, kind)
    ref_t, ref_v, ref_c = reference_block(
        t.times, t.columns["v"][:, 0], -999.0, width, kind)
    assert np.array_equal(out.times, ref_t)
    assert np.array_equal(out.columns["v"].ravel(), ref_v, equal_nan=True)
    if kind != "count":
        assert np.array_equal(out.count_columns["v"].ravel(), ref_c)


@pytest.mark.parametrize("seed", range(12))
def test_count_conservation_property(seed):
    t = make_table(seed=seed + 50, n=120, fill=-1.0)
    out = filter_block(t, 13.0, "avg")
    v = t.columns["v"]
    non_missing = int((~(np.isnan(v) | (v == -1.0))).sum())
    assert int(out.count_columns["v"].sum()) == non_missing


@pytest.mark.parametrize("seed", range(8))
def test_window_mean_within_min_max(seed):
    t = make_table(seed=seed + 90, n=150)
    avg = filter_block(t, 9.0, "avg")
    mn = filter_block(t, 9.0, "min")
    mx = filter_block(t, 9.0, "max")
    a = avg.columns["v"].ravel()
    ok = ~np.isnan(a)
    assert np.all(a[ok] >= mn.columns["v"].ravel()[ok] - 1e-12)
    assert np.all(a[ok] <= mx.columns["v"].ravel()[ok] + 1e-12)


def test_trailing_partial_window_included():
    t = ResultTable([0.0, 1.0, 2.0], {"v": [1.0, 2.0, 3.0]}, {"v": math.nan})
    out = filter_block(t, 2.0, "avg")
    assert out.n_rows == 2
    assert out.columns["v"].ravel()[1] == 3.0


def test_block_bad_width():
    with pytest.raises(BadArg):
        filter_block(make_table(n=5), 0.0, "avg")
    with pytest.raises(BadArg):
        filter_block(make_table(n=5), -1.0, "max")


def test_vector_block_counts_per_component():
    times = [0.0, 1.0]
    values = [[1.0, math.nan], [3.0, 4.0]]
    t = ResultTable(times, {"v": values}, {"v": math.nan})
    out = filter_block(t, 10.0, "avg")
    assert np.array_equal(out.columns["v"][0], [2.0, 4.0])
    assert np.array_equal(out.count_columns["v"][0], [2, 1])
