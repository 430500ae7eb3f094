import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vennpredict.taxonomy import DEFAULT_THETA, TaxonomyRule, category_of, key_to_str


class TestRuleExamples:
    """The worked three-class examples for each rule."""

    o = np.array([0.1, 0.7, 0.2])

    def test_v1_is_argmax(self):
        assert category_of(TaxonomyRule("v1"), self.o) == ("v1", 1)

    def test_v2_max_output_below_high_threshold(self):
        assert category_of(TaxonomyRule("v2", 0.75), self.o) == ("v2", 1, False)

    def test_v3_second_output_below_low_threshold(self):
        assert category_of(TaxonomyRule("v3", 0.25), self.o) == ("v3", 1, False)

    def test_v4_gap_at_threshold_counts_as_above(self):
        # 0.7 - 0.2 = 0.5 and the comparison is closed
        assert category_of(TaxonomyRule("v4", 0.5), self.o) == ("v4", 1, True)

    def test_v5_collects_all_classes_at_or_above_threshold(self):
        key = category_of(TaxonomyRule("v5", 0.25), np.array([0.3, 0.45, 0.25]))
        assert key == ("v5", (0, 1, 2))

    def test_v5_empty_set_is_a_valid_key(self):
        key = category_of(TaxonomyRule("v5", 0.4), np.array([0.34, 0.33, 0.33]))
        assert key == ("v5", ())

    def test_argmax_tie_breaks_to_lowest_index(self):
        assert category_of(TaxonomyRule("v1"), np.array([0.4, 0.4, 0.2])) == ("v1", 0)


class TestRuleValidation:
    def test_default_thetas(self):
        assert TaxonomyRule("v1").theta is None
        for kind in ("v2", "v3", "v4", "v5"):
            assert TaxonomyRule(kind).theta == DEFAULT_THETA[kind]

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="unknown taxonomy"):
            TaxonomyRule("v9")

    @pytest.mark.parametrize("kind,theta", [("v3", 0.6), ("v5", 0.5), ("v2", 1.0), ("v4", 0.0)])
    def test_static_theta_ranges(self, kind, theta):
        with pytest.raises(ValueError, match="threshold"):
            TaxonomyRule(kind, theta)

    def test_v2_theta_must_exceed_uniform_probability(self):
        rule = TaxonomyRule("v2", 0.2)
        with pytest.raises(ValueError, match="1/c"):
            rule.validate_for(4)
        rule.validate_for(6)  # 0.2 > 1/6 is fine

    def test_non_probability_inputs_rejected(self):
        rule = TaxonomyRule("v1")
        with pytest.raises(ValueError, match="probability"):
            category_of(rule, np.array([0.5, 0.6, 0.2]))
        with pytest.raises(ValueError, match="probability"):
            category_of(rule, np.array([-0.1, 0.9, 0.2]))


def random_probability_vectors(rng, n, c):
    concentrations = rng.uniform(0.2, 5.0)
    return rng.dirichlet(np.full(c, concentrations), size=n)


@pytest.mark.parametrize("c", [2, 3, 5])
def test_distinct_keys_never_exceed_category_bounds(c):
    rng = np.random.default_rng(99)
    rules = [TaxonomyRule(kind) for kind in ("v1", "v2", "v3", "v4", "v5")]
    seen = {rule.kind: set() for rule in rules}
    for block in range(10):
        for o in random_probability_vectors(rng, 1000, c):
            for rule in rules:
                seen[rule.kind].add(category_of(rule, o))
    for rule in rules:
        assert len(seen[rule.kind]) <= rule.max_categories(c)


def test_dropping_the_flag_recovers_the_v1_key():
    rng = np.random.default_rng(7)
    v1 = TaxonomyRule("v1")
    for o in random_probability_vectors(rng, 200, 4):
        base = category_of(v1, o)
        for kind in ("v2", "v3", "v4"):
            refined = category_of(TaxonomyRule(kind), o)
            assert ("v1", refined[1]) == base


@settings(max_examples=200, deadline=None)
@given(
    raw=st.lists(st.floats(0.01, 1.0), min_size=3, max_size=6),
    swap=st.tuples(st.integers(0, 5), st.integers(0, 5)),
)
def test_swapping_non_argmax_coordinates_keeps_keys(raw, swap):
    o = np.array(raw) / np.sum(raw)
    top = int(np.argmax(o))
    i, j = (s % len(o) for s in swap)
    if top in (i, j) or i == j:
        return
    swapped = o.copy()
    swapped[[i, j]] = swapped[[j, i]]
    for kind in ("v1", "v2", "v3", "v4"):
        rule = TaxonomyRule(kind)
        assert category_of(rule, swapped) == category_of(rule, o)


def test_key_serialization_forms():
    assert key_to_str(("v1", 2)) == "V1:2"
    assert key_to_str(("v2", 1, True)) == "V2:1+"
    assert key_to_str(("v3", 0, False)) == "V3:0-"
    assert key_to_str(("v5", (0, 1))) == "V5:{0,1}"
    assert key_to_str(("v5", ())) == "V5:{}"
