"""Canonical JSON hashing: key-order invariance and non-finite rejection."""

from __future__ import annotations

import hashlib
import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sessionlens.errors import InvalidInputError
from sessionlens.hashing import canonical_hash, canonical_json, digest_bytes

EMPTY_OBJECT_DIGEST = "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a"


def test_empty_object_golden_digest():
    assert canonical_hash({}) == EMPTY_OBJECT_DIGEST


def test_key_order_invariance():
    assert canonical_hash({"a": 1, "b": [2, 3]}) == canonical_hash({"b": [2, 3], "a": 1})


def test_canonical_json_compact_sorted():
    assert canonical_json({"b": 1, "a": {"y": 2, "x": 3}}) == '{"a":{"x":3,"y":2},"b":1}'


def test_unicode_not_escaped():
    assert canonical_json({"s": "café"}) == '{"s":"café"}'


@pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
def test_nonfinite_rejected(bad):
    with pytest.raises(InvalidInputError, match="non-canonical value"):
        canonical_json({"x": bad})


def test_nonfinite_nested_rejected():
    with pytest.raises(InvalidInputError):
        canonical_json({"x": [1, {"y": float("nan")}]})


def test_digest_bytes_matches_sha256():
    assert digest_bytes(b"abc") == hashlib.sha256(b"abc").hexdigest()


json_values = st.recursive(
    st.none() | st.booleans() | st.integers(-10**6, 10**6)
    | st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False) | st.text(max_size=20),
    lambda children: st.lists(children, max_size=4)
    | st.dictionaries(st.text(max_size=8), children, max_size=4),
    max_leaves=20,
)


@given(json_values)
def test_canonical_json_parses_back_to_equal_value(value):
    assert json.loads(canonical_json(value)) == value


@given(st.dictionaries(st.text(min_size=1, max_size=8), st.integers(), max_size=6))
def test_hash_stable_under_reinsertion_order(d):
    reordered = dict(reversed(list(d.items())))
    assert canonical_hash(d) == canonical_hash(reordered)
