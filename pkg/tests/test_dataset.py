import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dppmle import Dataset, empirical_stats, parse_dataset, serialize_dataset
from dppmle.errors import ParseError, ValidationError


def test_parse_basic():
    D = parse_dataset('{"ground_set_size":2,"samples":[[1],[2]]}')
    assert D.n == 2 and D.m == 2
    assert D.samples == ((0,), (1,))


def test_duplicates_preserved():
    D = parse_dataset('{"ground_set_size":3,"samples":[[1,2],[1,2]]}')
    assert D.m == 2
    assert D.samples[0] == D.samples[1]


def test_zero_index_rejected():
    with pytest.raises(ValidationError, match="sample 1"):
        parse_dataset('{"ground_set_size":2,"samples":[[0]]}')


def test_repeated_element_rejected():
    with pytest.raises(ValidationError, match="sample 2"):
        parse_dataset('{"ground_set_size":2,"samples":[[1],[2,2]]}')


def test_unsorted_sample_normalized():
    assert parse_dataset('{"ground_set_size":3,"samples":[[3,1]]}').samples == ((0, 2),)


def test_malformed_json_position():
    with pytest.raises(ParseError) as exc:
        parse_dataset('{"ground_set_size": 2,\n "samples": [[1],}')
    assert exc.value.line == 2


def test_wrong_shape():
    with pytest.raises(ParseError):
        parse_dataset('[[1]]')


def test_empty_dataset_rejected():
    with pytest.raises(ValidationError):
        Dataset(2, ())


def test_empty_sample_tracked():
    D = parse_dataset('{"ground_set_size":2,"samples":[[],[1]]}')
    assert D.has_empty


def test_stats_examples():
    st1 = empirical_stats(Dataset.from_one_indexed(2, [[1], [2]]))
    assert st1.frequencies == (1, 1) and st1.a_max == 1
    tri = empirical_stats(Dataset.from_one_indexed(3, [[1, 2], [2, 3], [1, 3]]))
    assert tri.frequencies == (2, 2, 2)
    full = empirical_stats(Dataset.from_one_indexed(1, [[1], [1]]))
    assert full.frequencies == (2,) and full.full_frequency == (0,)


def test_distribution_exact():
    stt = empirical_stats(Dataset.from_one_indexed(3, [[1], [1], [2, 3]]))
    assert sum(stt.distribution.values()) == 1
    assert stt.distribution[(0,)] == Fraction(2, 3)


samples_st = st.integers(1, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.sets(st.integers(1, n)), min_size=1, max_size=8)))


@given(samples_st)
def test_serialize_round_trip(case):
    n, sets = case
    text = json.dumps({"ground_set_size": n, "samples": [sorted(s) for s in sets]}) + "\n"
    D = parse_dataset(text)
    assert serialize_dataset(D) == text
    assert parse_dataset(serialize_dataset(D)) == D
