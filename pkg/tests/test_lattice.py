import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pbanalogy.corpus import pad
from pbanalogy.index import SubstringIndex
from pbanalogy.lattice import (
    Mode,
    NoPronunciation,
    Segmentation,
    enumerate_segmentations,
    expand_candidates,
    generate_candidates,
)

from conftest import LETTERS, entries, lexicons


def pieces(word, segs):
    return [" + ".join(s.pieces(word)) for s in segs]


def test_longevity_segmentations(longevity_view):
    word = "#longevity#"
    segs = enumerate_segmentations(word, longevity_view, Mode.OVERLAP)
    assert sorted(pieces(word, segs)) == sorted([
        "#longe + evi + ity#",
        "#longe + ev + vity#",
        "#long + ge + evity#",
        "#lon + nge + evity#",
    ])
    # '#longe + evity#' is shorter but disagrees on the shared 'e'
    assert all(len(s) == 3 for s in segs)


def test_inconsistent_two_segment_split_has_no_candidate(longevity_view):
    word = "#longevity#"
    seg = Segmentation(((0, 5), (5, 10)), Mode.OVERLAP)
    assert expand_candidates(word, [seg], longevity_view) == []


def test_order_is_lexicographic_and_deterministic(longevity_view):
    a = enumerate_segmentations("#longevity#", longevity_view)
    b = enumerate_segmentations("#longevity#", longevity_view)
    assert a == b
    assert [s.segments for s in a] == sorted(s.segments for s in a)


def test_whole_word_in_index_gives_one_segment():
    view = SubstringIndex.build(entries(("cat", "k@t"), ("cot", "kat"))).view()
    for mode in Mode:
        segs = enumerate_segmentations("#cat#", view, mode)
        assert [s.segments for s in segs] == [((0, 4),)]


def anecdote_view():
    # 'cd' occurs nowhere, so no overlap-one path crosses it
    lex = entries(("anec", "@nIk"), ("dote", "dot-"), ("neck", "nEk-"))
    return SubstringIndex.build(lex).view()


def test_silence_fallback_engaged():
    view = anecdote_view()
    word = "#anecdote#"
    segs = enumerate_segmentations(word, view, Mode.OVERLAP, fallback="all")
    assert segs and all(s.fallback_junction is not None for s in segs)
    for s in segs:
        k = s.fallback_junction
        assert s.segments[k + 1][0] == s.segments[k][1] + 1
    cands = generate_candidates(word, view, Mode.OVERLAP)
    assert any(c.assembled == "#@nIkdot-#" for c in cands)


def test_fallback_disabled_silences():
    with pytest.raises(NoPronunciation):
        enumerate_segmentations("#anecdote#", anecdote_view(), Mode.OVERLAP, fallback="none")


def test_fallback_leftmost_subset():
    lex = entries(("ab", "xy"), ("bc", "yz"), ("cd", "zw"), ("de", "wv"), ("ef", "vu"), ("abc", "xyz"),
                  ("def", "wvu"))
    view = SubstringIndex.build(lex).view()
    word = "#abxdef#"
    with pytest.raises(NoPronunciation):
        enumerate_segmentations(word, view, fallback="all")
    word = "#abcdef#"
    full = enumerate_segmentations(word, view, fallback="all")
    left = enumerate_segmentations(word, view, fallback="leftmost")
    assert set(left) <= set(full)


def test_unknown_letter_is_silent_in_both_modes():
    view = SubstringIndex.build(entries(("ab", "xy"))).view()
    for mode in Mode:
        with pytest.raises(NoPronunciation):
            generate_candidates("#aq#", view, mode)


def test_singleton_pronunciations_give_one_candidate_per_segmentation():
    lex = entries(("abc", "xyz"), ("bcd", "yzw"), ("cde", "zwv"))
    view = SubstringIndex.build(lex).view()
    word = "#abcde#"
    segs = enumerate_segmentations(word, view)
    cands = expand_candidates(word, segs, view)
    assert len(cands) == len(segs)


def test_candidate_cap_warns(caplog):
    lex = entries(("ab", "xy"), ("ab", "xz"), ("ab", "wy"), ("ba", "yx"), ("ba", "zx"))
    view = SubstringIndex.build(lex).view()
    word = "#abab#"
    full = generate_candidates(word, view, Mode.NONOVERLAP)
    assert len(full) > 2
    capped = generate_candidates(word, view, Mode.NONOVERLAP, max_candidates=2)
    assert len(capped) == 2
    assert "candidate cap" in caplog.text


# -- brute-force oracles ----------------------------------------------------------

def _covers(L, min_len, overlap, junctions):
    """Every ordered cover of 0..L-1; a junction is a zero-overlap boundary."""
    def rec(a, acc, used):
        for b in range(a + min_len - 1, L):
            seg = acc + [(a, b)]
            if b == L - 1:
                yield tuple(seg), used
                continue
            if overlap:
                yield from rec(b, seg, used)
                if used is None and junctions:
                    yield from rec(b + 1, seg, len(seg) - 1)
            else:
                yield from rec(b + 1, seg, None)
    yield from rec(0, [], None)


def _brute_candidates(word, seg, view):
    choices = []
    for p in seg.pieces(word):
        d = view.lookup(p)
        if d is None:
            return []
        choices.append(sorted(d.counts))
    out = []
    for combo in itertools.product(*choices):
        if all(not ov or combo[k][-1] == combo[k + 1][0] for k, ov in enumerate(seg.overlaps)):
            out.append(combo)
    return out


def _brute_segmentations(word, view, mode):
    L = len(word)
    overlap = mode is Mode.OVERLAP
    for junctions in ([False, True] if overlap else [False]):
        feasible = []
        for segs, k in _covers(L, 2 if overlap else 1, overlap, junctions):
            if junctions and k is None:
                continue
            s = Segmentation(segs, mode, k)
            if _brute_candidates(word, s, view):
                feasible.append(s)
        if feasible:
            n = min(len(s) for s in feasible)
            return {s for s in feasible if len(s) == n}
    return set()


words = st.text(LETTERS, min_size=1, max_size=6).map(pad)


@given(lexicons(min_size=1, max_size=10), words, st.sampled_from(list(Mode)))
def test_segmentations_match_bruteforce(lex, word, mode):
    view = SubstringIndex.build(lex).view()
    expected = _brute_segmentations(word, view, mode)
    try:
        got = enumerate_segmentations(word, view, mode)
    except NoPronunciation:
        assert not expected
        return
    assert set(got) == expected
    assert len(got) == len(expected)


@given(lexicons(min_size=1, max_size=10), words, st.sampled_from(list(Mode)))
def test_expansion_matches_cartesian_filter(lex, word, mode):
    view = SubstringIndex.build(lex).view()
    try:
        segs = enumerate_segmentations(word, view, mode)
    except NoPronunciation:
        return
    cands = expand_candidates(word, segs, view)
    got = sorted((c.segmentation.segments, c.prons) for c in cands)
    want = sorted((s.segments, combo) for s in segs for combo in _brute_candidates(word, s, view))
    assert got == want
    assert len(set(got)) == len(got)


@given(lexicons(min_size=1, max_size=10), words, st.sampled_from(list(Mode)))
def test_segmentation_invariants(lex, word, mode):
    view = SubstringIndex.build(lex).view()
    try:
        cands = generate_candidates(word, view, mode)
    except NoPronunciation:
        return
    segs = {c.segmentation for c in cands}
    n_star = {len(s) for s in segs}
    assert len(n_star) == 1
    L = len(word)
    for s in segs:
        assert s.segments[0][0] == 0 and s.segments[-1][1] == L - 1
        assert all(view.lookup(p) is not None for p in s.pieces(word))
        total = sum(s.lengths())
        if mode is Mode.NONOVERLAP:
            assert total == L
        else:
            assert total == L + (len(s) - 1) - (s.fallback_junction is not None)
    for c in cands:
        assert len(c.assembled) == L
        for k, ov in enumerate(c.segmentation.overlaps):
            if ov:
                assert c.prons[k][-1] == c.prons[k + 1][0]
