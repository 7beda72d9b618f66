import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from csibeam.database import CsiDatabase
from csibeam.errors import ConfigurationError, DimensionError, EmptyNeighborhoodError
from csibeam.neighborhood import (NeighborhoodParams, build_neighborhood, closeness, closeness_all,
                                  expand_local, match_initial, threshold_from_angle)

from conftest import crandn

cvec = st.integers(0, 2**32 - 1).map(lambda s: crandn(np.random.default_rng(s), 4))


def random_db(n=60, M=4, seed=0):
    return CsiDatabase(crandn(np.random.default_rng(seed), n, M))


def test_closeness_examples():
    g = np.array([1 + 2j, -1j, 3])
    assert closeness(g, g) == pytest.approx(1.0)
    assert closeness([1, 0], [0, 1]) == 0.0
    assert closeness([1, 0], np.array([1, 1]) / math.sqrt(2)) == pytest.approx(0.5)


def test_closeness_errors():
    with pytest.raises(ValueError):
        closeness([0, 0], [1, 0])
    with pytest.raises(DimensionError):
        closeness([1, 0], [1, 0, 0])


@given(cvec, cvec, st.floats(0.1, 10), st.floats(0, 2 * np.pi))
def test_closeness_properties(g, h, scale, phase):
    c = closeness(g, h)
    assert 0.0 <= c <= 1.0
    assert closeness(h, g) == pytest.approx(c, abs=1e-12)
    assert closeness(scale * np.exp(1j * phase) * g, h) == pytest.approx(c, abs=1e-12)


def test_closeness_all_matches_scalar():
    rng = np.random.default_rng(2)
    g, H = crandn(rng, 5), crandn(rng, 7, 5)
    assert np.allclose(closeness_all(g, H), [closeness(g, h) for h in H])


def test_angle_mapping():
    assert threshold_from_angle(40, 'cosine') == pytest.approx(0.766, abs=1e-3)
    assert threshold_from_angle(40) == pytest.approx(math.cos(math.radians(40)) ** 2)
    with pytest.raises(ConfigurationError):
        threshold_from_angle(40, 'bogus')


def test_params_validation():
    with pytest.raises(ConfigurationError):
        NeighborhoodParams(mode='nearest')
    with pytest.raises(ConfigurationError):
        NeighborhoodParams(T=0)
    with pytest.raises(ConfigurationError):
        NeighborhoodParams(k=-1)


def test_match_contains_query():
    db = random_db()
    idx = match_initial(db, db.channels[17], NeighborhoodParams(mode='threshold', gamma=0.99))
    assert 17 in idx


def test_match_gamma_one_is_empty():
    db = random_db()
    assert match_initial(db, crandn(np.random.default_rng(9), 4),
                         NeighborhoodParams(mode='threshold', gamma=1.0)) == []


def test_match_count_non_increasing_in_gamma():
    db = random_db(200)
    g = crandn(np.random.default_rng(3), 4)
    counts = [len(match_initial(db, g, NeighborhoodParams(mode='threshold', gamma=x)))
              for x in (0.2, 0.3, 0.4, 0.5, 0.6)]
    assert counts == sorted(counts, reverse=True)


def test_top_t_picks_best_and_breaks_ties_by_index():
    H = np.array([[1, 0], [1, 0], [0, 1], [1, 0]], dtype=complex)
    idx = match_initial(CsiDatabase(H), np.array([1, 0]), NeighborhoodParams(T=2))
    assert idx == [0, 1]


def test_exclude_query():
    db = random_db()
    p = NeighborhoodParams(T=1, exclude_query=True)
    assert match_initial(db, db.channels[-1], p) != [len(db) - 1]
    assert match_initial(db, db.channels[10], p, query_index=10) != [10]


@pytest.mark.parametrize('initial, k, expected', [
    ([7], 0, [7]),
    ([7, 8], 1, [6, 7, 8, 9]),
    ([0], 2, [0, 1, 2]),
    ([59], 2, [57, 58, 59]),
])
def test_expand_examples(initial, k, expected):
    assert list(expand_local(random_db(), initial, k).indices) == expected


@pytest.mark.parametrize('k', [0, 1, 3, 5])
def test_expand_three_disjoint_interior(k):
    assert expand_local(random_db(), [10, 30, 50], k).K == 6 * k + 3


def test_expand_empty_and_out_of_range():
    with pytest.raises(EmptyNeighborhoodError):
        expand_local(random_db(), [], 1)
    with pytest.raises(IndexError):
        expand_local(random_db(), [60], 1)


@given(st.lists(st.integers(0, 59), min_size=1, max_size=6, unique=True), st.integers(0, 6))
def test_expand_size_bound(initial, k):
    db = random_db()
    initial = sorted(initial)
    nb = expand_local(db, initial, k)
    T = len(initial)
    assert nb.K <= (2 * k + 1) * T
    assert len(set(nb.indices)) == nb.K == len(nb.channels)
    assert np.array_equal(nb.channels, db.channels[nb.indices])
    disjoint = all(b - a > 2 * k for a, b in zip(initial, initial[1:]))
    interior = all(k <= m < 60 - k for m in initial)
    assert (nb.K == (2 * k + 1) * T) == (disjoint and interior)
    assert set(expand_local(db, initial, k + 1).indices) >= set(nb.indices)


def test_build_single_record():
    g = np.array([1 + 1j, 2])
    nb = build_neighborhood(CsiDatabase(g[None, :]), g,
                            NeighborhoodParams(mode='threshold', gamma=0.5, k=0))
    assert nb.K == 1
    assert np.array_equal(nb.channels[0], g)


def test_build_empty_raises_with_guidance():
    db = random_db()
    with pytest.raises(EmptyNeighborhoodError, match='lower the threshold'):
        build_neighborhood(db, crandn(np.random.default_rng(1), 4),
                           NeighborhoodParams(mode='threshold', gamma=1.0))


def test_duplicates_kept_per_index():
    H = np.array([[1, 0], [1, 0], [0, 1]], dtype=complex)
    nb = build_neighborhood(CsiDatabase(H), np.array([1, 0]),
                            NeighborhoodParams(mode='threshold', gamma=0.9, k=0))
    assert list(nb.indices) == [0, 1]
