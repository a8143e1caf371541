from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as hst

from symloc.serialization import (
    SchemaError,
    decode_complex,
    decode_matrix,
    decode_state,
    dumps,
    encode_matrix,
    encode_state,
    loads,
)
from symloc.tensor_core import random_state

finite = hst.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=50, deadline=None)
@given(hst.lists(hst.tuples(finite, finite), min_size=4, max_size=4))
def test_matrix_round_trip_is_bit_exact(pairs):
    m = np.array([complex(a, b) for a, b in pairs]).reshape(2, 2)
    back = decode_matrix(json.loads(json.dumps(encode_matrix(m))))
    assert np.array_equal(back, m)


def test_state_round_trip_is_bit_exact():
    s = random_state(3, 3, np.random.default_rng(0))
    back = decode_state(loads(dumps(s)))
    assert np.array_equal(back.amps, s.amps)
    assert (back.n, back.d) == (3, 3)


def test_unknown_schema_is_refused():
    doc = encode_state(random_state(2, 2, np.random.default_rng(1)))
    doc["schema"] = 99
    with pytest.raises(SchemaError):
        decode_state(doc)
    with pytest.raises(SchemaError):
        loads(json.dumps({"schema": 2}))


def test_malformed_inputs():
    with pytest.raises(SchemaError):
        decode_complex([1.0])
    with pytest.raises(SchemaError):
        decode_state({"n": 2, "d": 2})
    assert decode_complex(3) == 3 + 0j
