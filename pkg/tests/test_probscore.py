import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbanalogy import probscore as ps
from pbanalogy.corpus import AlignedEntry, pad
from pbanalogy.index import SubstringIndex
from pbanalogy.lattice import Mode, NoPronunciation, generate_candidates
from pbanalogy.strategies import CandidateSet, factor_products

from conftest import LETTERS, lexicons, substring_closed

LONGEVITY = "#longevity#"
TARGET = (("#lon", "nge", "evity#"), ("#lan", "nJE", "Evxti#"))


@pytest.fixture
def longevity(longevity_view):
    cs = CandidateSet(LONGEVITY, generate_candidates(LONGEVITY, longevity_view), longevity_view)
    return cs, ps.find_candidate(cs, *TARGET)


def test_factor_traces(longevity):
    cs, i = longevity
    assert ps.factor_trace(cs, i, "PROD") == [Fraction(2, 9), Fraction(9, 114), Fraction(2, 3)]
    assert ps.factor_trace(cs, i, "CONDR") == [Fraction(2, 9), Fraction(9, 92), Fraction(2, 3)]
    assert ps.factor_trace(cs, i, "CONDL") == [Fraction(2, 4), Fraction(9, 10), Fraction(2, 3)]
    assert ps.factor_trace(cs, i, "CONDF") == [Fraction(2, 4), Fraction(9, 10), Fraction(2, 3)]


def test_rule_masses(longevity):
    cs, i = longevity
    condr = ps.candidate_mass(cs, i, "CONDR", exact=True)
    condl = ps.candidate_mass(cs, i, "CONDL", exact=True)
    assert condr == Fraction(2, 9) * Fraction(9, 92) * Fraction(2, 3)
    assert round(float(condr), 4) == 0.0145
    assert condl == Fraction(3, 10)
    assert ps.candidate_mass(cs, i, "CONDF", exact=True) == Fraction(3, 10)
    condrl = ps.candidate_mass(cs, i, "CONDRL", exact=True)
    assert condrl == (condr + condl) / 2
    assert round(float(condrl), 3) == 0.157


def test_condall_is_mean_over_six_orders(longevity):
    cs, i = longevity
    exact = ps.candidate_mass(cs, i, "CONDALL", exact=True)
    assert exact == ps.condall_bruteforce(cs, i, exact=True)
    # the six per-order products, worked by hand from the frequency table
    orders = [
        Fraction(2, 9) * Fraction(9, 92) * Fraction(2, 3),   # 1 2 3
        Fraction(2, 9) * Fraction(9, 10) * Fraction(2, 3),   # 1 3 2
        Fraction(2, 4) * Fraction(9, 114) * Fraction(2, 3),  # 2 1 3
        Fraction(2, 4) * Fraction(9, 114) * Fraction(2, 3),  # 2 3 1
        Fraction(2, 9) * Fraction(9, 10) * Fraction(2, 3),   # 3 1 2
        Fraction(2, 4) * Fraction(9, 10) * Fraction(2, 3),   # 3 2 1
    ]
    assert exact == sum(orders) / 6
    assert ps.candidate_mass(cs, i, "CONDALL") == pytest.approx(float(exact), rel=1e-12)


def test_longevity_decision(longevity):
    cs, _ = longevity
    correct = "#lanJEvxti#"
    for rule in ("CONDL", "CONDF"):
        _, ties = ps.decide(ps.cond_score(rule, cs))
        assert ties == [correct]
    _, ties = ps.decide(ps.cond_score("PROD", cs))
    assert correct not in ties


def test_explain_shows_exact_factors(longevity):
    cs, _ = longevity
    text = ps.explain(cs, "CONDL")
    assert "#lon + nge + evity#" in text
    assert "(2/3)(9/10)(1/2) = 3/10" in text


def test_prob_example_products():
    view = SubstringIndex.from_distributions(substring_closed({
        "#l": {"#l": 94, "#-": 6},
        "y#": {"I#": 78, "A#": 22},
    })).view()
    word = "#ly#"
    cs = CandidateSet(word, generate_candidates(word, view, Mode.NONOVERLAP), view)
    norm = dict(zip(cs.assembled, factor_products(cs, "norm")))
    assert norm["#lI#"] == pytest.approx(0.7332)
    est = ps.prob_score(cs, exact=True)
    assert est["#lI#"] == Fraction(94, 101) * Fraction(78, 101)


def test_single_candidate_posterior():
    view = SubstringIndex.build([AlignedEntry.from_strings("ab", "xy")]).view()
    cs = CandidateSet("#ab#", generate_candidates("#ab#", view, Mode.NONOVERLAP), view)
    post = ps.prob_score(cs, exact=True)
    assert post == {"#xy#": Fraction(1, 2)}
    ranking, ties = ps.decide(post)
    assert ties == ["#xy#"] and len(ranking) == 1


def test_decide_ties_and_emission():
    ranking, ties = ps.decide({"#a-b#": Fraction(1, 3), "#ab-#": Fraction(1, 3), "#c#": Fraction(1, 5)})
    assert ties == ["#a-b#", "#ab-#"]
    assert [ps.surface(y) for y in ties] == ["ab", "ab"]
    with pytest.raises(NoPronunciation):
        ps.decide({})


def test_decide_float_tolerance():
    a = 0.1 + 0.2
    _, ties = ps.decide({"x": a, "y": 0.3, "z": 0.2})
    assert ties == ["x", "y"]


def test_ordering_weights_sum_to_one():
    for n in range(1, 8):
        w = ps.ordering_weights(n)
        assert len(w) == 2 ** (n - 1)
        assert sum(f for _, f in w) == 1
        # counts of permutations per up-down signature are Euler zigzag-like integers
        assert all((f * math.factorial(n)).denominator == 1 for _, f in w)


# -- properties on random lexicons ---------------------------------------------------

def candidate_set(lex, word, mode=Mode.OVERLAP):
    view = SubstringIndex.build(lex).view()
    word = pad(word)
    try:
        return CandidateSet(word, generate_candidates(word, view, mode), view)
    except NoPronunciation:
        return None


def reverse_entry(e):
    return AlignedEntry(e.letters[::-1], e.phonemes[::-1])


word_strategy = st.text(LETTERS, min_size=1, max_size=6)


@given(lexicons(min_size=2, max_size=12), word_strategy)
def test_condall_matches_bruteforce(lex, word):
    cs = candidate_set(lex, word)
    if cs is None:
        return
    for i in range(len(cs)):
        if cs.candidates[i].n_segments <= 5:
            assert ps.candidate_mass(cs, i, "CONDALL", exact=True) == ps.condall_bruteforce(cs, i, exact=True)
            for root in (2, "n"):
                assert ps.candidate_mass(cs, i, "CONDALL", root=root) == pytest.approx(
                    ps.condall_bruteforce(cs, i, root=root), rel=1e-9)


@given(lexicons(min_size=2, max_size=12), word_strategy)
def test_reversal_swaps_left_and_right(lex, word):
    cs = candidate_set(lex, word)
    rcs = candidate_set([reverse_entry(e) for e in lex], word[::-1])
    if cs is None:
        assert rcs is None
        return
    flip = {y: y[::-1] for y in cs.classes}
    pairs = [("CONDR", "CONDL"), ("CONDL", "CONDR"), ("CONDRL", "CONDRL"), ("CONDALL", "CONDALL"),
             ("CONDF", "CONDF"), ("PROD", "PROD")]
    for rule, mirrored in pairs:
        a = ps.cond_score(rule, cs, exact=True)
        b = ps.cond_score(mirrored, rcs, exact=True)
        assert {flip[y]: m for y, m in a.items()} == b


@given(lexicons(min_size=2, max_size=12), word_strategy)
def test_nonoverlap_rules_coincide(lex, word):
    cs = candidate_set(lex, word, Mode.NONOVERLAP)
    if cs is None:
        return
    prod = ps.candidate_masses("PROD", cs, exact=True)
    for rule in ("CONDR", "CONDL", "CONDF", "CONDRL", "CONDALL"):
        assert ps.candidate_masses(rule, cs, exact=True) == prod
    assert ps.prob_score(cs, exact=True) == ps.posterior(cs, prod)


@given(lexicons(min_size=2, max_size=12), word_strategy)
def test_factors_are_probabilities(lex, word):
    cs = candidate_set(lex, word)
    if cs is None:
        return
    for i, c in enumerate(cs.candidates):
        n = c.n_segments
        for k in range(n):
            for lf in (False, True):
                for rf in (False, True):
                    f = ps.segment_factor(cs, i, k, lf, rf, exact=True)
                    assert 0 <= f <= 1
                    fixed_left = lf and k > 0 and c.segmentation.overlaps[k - 1]
                    fixed_right = rf and k < n - 1 and c.segmentation.overlaps[k]
                    if fixed_left and fixed_right and len(c.prons[k]) == 2:
                        assert f == 1
        for rule in ps.COND_RULES:
            assert ps.candidate_mass(cs, i, rule, exact=True) >= 0


@given(lexicons(min_size=2, max_size=12), word_strategy)
def test_two_segments_condall_equals_condrl(lex, word):
    cs = candidate_set(lex, word)
    if cs is None:
        return
    for i, c in enumerate(cs.candidates):
        if c.n_segments == 2:
            assert ps.candidate_mass(cs, i, "CONDALL", exact=True) == \
                ps.candidate_mass(cs, i, "CONDRL", exact=True)
