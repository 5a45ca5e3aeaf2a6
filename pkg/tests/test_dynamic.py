"""Semantic argmax over the static Top-k, with fallback on backend failure."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emopro.backends import (
    BackendRole,
    BackendSet,
    EndpointConfig,
    MockFixture,
    build_mock_suite,
)
from emopro.dynamic import select_prompt

CANDIDATES = [
    ("p1", "the tide rolls in slowly"),
    ("p2", "storms gather over the harbor"),
    ("p3", "sunlight warms the quiet street"),
]


def semantic_backends(table: dict[str, float]) -> BackendSet:
    fixture = MockFixture(seed=1, semantic=table)
    return BackendSet.from_mocks(build_mock_suite(fixture))


def test_highest_relevance_wins():
    backends = semantic_backends(
        {
            "the tide rolls in slowly": 0.2,
            "storms gather over the harbor": 0.9,
            "sunlight warms the quiet street": 0.5,
        }
    )
    choice = select_prompt("rain on the docks", CANDIDATES, backends)
    assert choice.chosen_id == "p2"
    assert choice.fallback is False
    assert [s.candidate_id for s in choice.scores] == ["p1", "p2", "p3"]
    assert [s.relevance for s in choice.scores] == [0.2, 0.9, 0.5]


def test_target_specific_entries_outrank_generic_ones():
    # "target||candidate" keys take precedence over bare candidate keys
    backends = semantic_backends(
        {
            "rain on the docks||the tide rolls in slowly": 1.0,
            "the tide rolls in slowly": 0.1,
            "storms gather over the harbor": 0.9,
            "sunlight warms the quiet street": 0.5,
        }
    )
    choice = select_prompt("rain on the docks", CANDIDATES, backends)
    assert choice.chosen_id == "p1"


def test_all_equal_scores_fall_back_to_static_order():
    backends = semantic_backends(
        {transcript: 0.7 for _, transcript in CANDIDATES}
    )
    choice = select_prompt("anything at all", CANDIDATES, backends)
    assert choice.chosen_id == "p1"


def test_single_candidate_is_chosen_outright():
    backends = semantic_backends({"the tide rolls in slowly": 0.3})
    choice = select_prompt("anything", CANDIDATES[:1], backends)
    assert choice.chosen_id == "p1"
    assert len(choice.scores) == 1


def test_unreachable_backend_falls_back_to_static_top1():
    endpoints = {
        BackendRole.SEMANTIC: EndpointConfig(
            base_url="http://127.0.0.1:9",
            retries=1,
            backoff_s=0.01,
            timeout_s=0.2,
        )
    }
    backends = BackendSet(endpoints=endpoints, mocks={}, cache=None)
    choice = select_prompt("anything", CANDIDATES, backends)
    assert choice.fallback is True
    assert choice.chosen_id == "p1"
    assert choice.scores == ()


def test_empty_inputs_are_errors():
    backends = semantic_backends({})
    with pytest.raises(ValueError, match="at least one candidate"):
        select_prompt("anything", [], backends)
    with pytest.raises(ValueError, match="target text"):
        select_prompt("   ", CANDIDATES, backends)


grid = st.integers(min_value=0, max_value=1000).map(lambda n: n / 1000.0)


@settings(max_examples=40, deadline=None)
@given(values=st.lists(grid, min_size=1, max_size=8))
def test_choice_is_always_a_member_with_maximal_relevance(values):
    candidates = [(f"p{i}", f"transcript number {i}") for i in range(len(values))]
    table = {text: v for (_, text), v in zip(candidates, values)}
    choice = select_prompt("a target", candidates, semantic_backends(table))
    ids = [cid for cid, _ in candidates]
    assert choice.chosen_id in ids
    chosen = dict(zip(ids, values))[choice.chosen_id]
    assert chosen == max(values)
    # the earliest maximal entry wins
    assert choice.chosen_id == ids[values.index(max(values))]


@settings(max_examples=40, deadline=None)
@given(values=st.lists(grid, min_size=1, max_size=8))
def test_choice_is_invariant_to_increasing_score_maps(values):
    candidates = [(f"p{i}", f"transcript number {i}") for i in range(len(values))]
    base_table = {text: v for (_, text), v in zip(candidates, values)}
    # x/2 and 0.5 + x/2 are strictly increasing and stay within [0, 1]
    halved = {text: v / 2.0 for text, v in base_table.items()}
    lifted = {text: 0.5 + v / 2.0 for text, v in base_table.items()}
    base = select_prompt("a target", candidates, semantic_backends(base_table))
    assert (
        select_prompt("a target", candidates, semantic_backends(halved)).chosen_id
        == base.chosen_id
    )
    assert (
        select_prompt("a target", candidates, semantic_backends(lifted)).chosen_id
        == base.chosen_id
    )
