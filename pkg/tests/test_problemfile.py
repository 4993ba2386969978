import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coherence import problemfile as pf

WEATHER = """{
  "atoms": ["wr", "w", "r", "neither"],
  "events": [
    {"name": "warm", "atoms": ["wr", "w"]},
    {"name": "rainy", "atoms": ["wr", "r"]},
    {"name": "both", "atoms": ["wr"]}
  ],
  "credences": [0.5, 0.6, 0.7]
}
"""


def test_parse_named_events():
    data = pf.parse(WEATHER)
    base = pf.to_base(data)
    assert base.V.tolist() == [[1, 1, 0, 0], [1, 0, 1, 0], [1, 0, 0, 0]]
    assert base.names == ("warm", "rainy", "both")


def test_parse_matrix_form():
    base = pf.to_base(pf.parse('{"V": [[1, 0], [1, 0]], "credences": [0.1, 0.3], "weights": [1, 2]}'))
    assert base.weights.tolist() == [1, 2]


def test_clamp():
    base = pf.to_base(pf.parse('{"V": [[1, 0]], "credences": [0]}'), clamp=1e-3)
    assert base.q[0] == 1e-3


@pytest.mark.parametrize("text, line, needle", [
    ('{\n  "V": [[1, 0]],\n  "credences": [\n    1.5]\n}', 4, "maximum"),
    ('{\n  "V": [[1, 0]\n', 3, "invalid JSON"),
    ('{\n  "V": [[1, 0]],\n  "credences": [0.5, 0.5]\n}', 3, "expected 1"),
    ('{\n  "atoms": ["a"],\n  "events": [\n    {"name": "x", "atoms": ["b"]}\n  ],\n  "credences": [0.5]\n}',
     4, "unknown outcome"),
    ('{\n  "V": [[1, 2]],\n  "credences": [0.5]\n}', 2, "V/0/1"),
    ('{\n  "colour": 1\n}', 1, ""),
    ('{\n  "V": [[1, 0]],\n  "events": [],\n  "credences": [0.5]\n}', 1, ""),
])
def test_errors_carry_line_numbers(text, line, needle):
    with pytest.raises(pf.ProblemError) as err:
        pf.parse(text)
    assert err.value.line == line
    assert needle in str(err.value)


def test_value_lines():
    lines = pf.value_lines(WEATHER)
    assert lines[("credences",)] == 8
    assert lines[("events", 2)] == 6
    assert lines[("events", 1, "atoms", 1)] == 5


def test_number_format():
    assert pf.format_number(0.1) == "0.10000000000000001"
    assert pf.format_number(-0.0) == "0"
    assert pf.format_number(3) == "3"
    assert pf.format_number(float("inf")) == '"inf"'
    assert pf.format_number(True) == "true"


def test_canonical_order():
    text = pf.dumps({"credences": [0.5], "V": [[1, 0]], "atoms": ["a", "b"]})
    assert list(json.loads(text)) == ["atoms", "V", "credences"]


problems = st.integers(1, 4).flatmap(lambda n: st.integers(1, 5).flatmap(lambda N: st.fixed_dictionaries({
    "V": st.lists(st.lists(st.sampled_from([0, 1]), min_size=N, max_size=N), min_size=n, max_size=n),
    "credences": st.lists(st.floats(0, 1), min_size=n, max_size=n),
    "weights": st.lists(st.floats(0.01, 100), min_size=n, max_size=n),
})))


@settings(max_examples=200)
@given(problems)
def test_round_trip_is_byte_identical(problem):
    text = pf.dumps(problem)
    again = pf.dumps(pf.parse(text))
    assert again == text
    assert pf.parse(again) == pf.parse(text)
    assert np.allclose(pf.parse(text)["credences"], problem["credences"], rtol=0, atol=0)


def test_round_trip_named_and_experts():
    data = {
        "atoms": ["a", "b", "c"],
        "experts": [
            {"name": "one", "events": [{"name": "x", "atoms": ["a"]}], "credences": [0.25]},
            {"name": "two", "V": [[1, 1, 0]], "credences": [0.5]},
        ],
        "queries": [{"name": "x", "atoms": ["a"]}],
    }
    text = pf.dumps(data)
    assert pf.dumps(pf.parse(text)) == text
