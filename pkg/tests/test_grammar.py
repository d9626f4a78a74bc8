import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambekbang.calculi import get_calculus
from lambekbang.grammar import (
    LexiconError,
    bracketings,
    erases_to,
    load_lexicon,
    parse_lexicon,
    render_bracketing,
    s_recognize,
    t_recognize,
    term_to_meta,
    with_goal,
)
from lambekbang.kernel import check
from lambekbang.search import SearchBudget
from lambekbang.syntax import lambek_restriction_holds, parse_formula, parse_sequent, render

PHRASE = "the paper that John signed without reading"


def balanced_strings(n, pairs, allow_empty):
    """Oracle: word/bracket strings with the words in order, as plain text."""
    out = set()
    for slots in itertools.combinations(range(n + 2 * pairs), 2 * pairs):
        for opens in itertools.combinations(range(2 * pairs), pairs):
            toks, w = [], 0
            for i in range(n + 2 * pairs):
                if i in slots:
                    toks.append("[" if slots.index(i) in opens else "]")
                else:
                    toks.append(str(w))
                    w += 1
            depth, ok = 0, True
            for t in toks:
                depth += t == "["
                depth -= t == "]"
                ok &= depth >= 0
            text = " ".join(toks)
            if ok and depth == 0 and (allow_empty or "[ ]" not in text):
                out.add(text)
    return out


def term_text(term):
    return " ".join(f"[ {term_text(x[1])} ]".replace("[  ]", "[ ]") if isinstance(x, tuple) else str(x)
                    for x in term)


@pytest.mark.parametrize("n,k,empty", [(1, 2, True), (2, 2, True), (3, 2, False), (3, 3, True), (4, 2, False)])
def test_bracketings_match_oracle(n, k, empty):
    got = list(bracketings(n, k, empty))
    assert [p for p, _ in got] == sorted(p for p, _ in got)
    for pairs in range(k + 1):
        texts = [term_text(t) for p, t in got if p == pairs]
        assert len(texts) == len(set(texts))
        assert set(texts) == balanced_strings(n, pairs, empty), (n, pairs)


def test_lexicon_format():
    lex = parse_lexicon("# c\na, b: p/q\na: q\ngoal: p\n")
    assert lex.types("a") == (parse_formula("p/q"), parse_formula("q"))
    assert lex.types("b") == (parse_formula("p/q"),)
    assert with_goal(lex, "q").goal == parse_formula("q")
    for bad in ("a: p", "a p\ngoal: p", "a: p/\ngoal: p", ": p\ngoal: p"):
        with pytest.raises(LexiconError):
            parse_lexicon(bad)
    with pytest.raises(LexiconError):
        lex.types("zzz")


def test_bundled_lexicons():
    plain, br = load_lexicon("plain"), load_lexicon("bracketed")
    assert set(PHRASE.split()) <= set(plain.entries) and set(PHRASE.split()) <= set(br.entries)
    assert br.types("John") == (parse_formula("<>N"),)
    assert {"man", "who", "likes"} <= set(br.entries)


def test_fig1_by_s_recognition(goldens):
    d, calc = goldens["fig1"]
    r = s_recognize(calc, load_lexicon("plain"), PHRASE, SearchBudget(time_limit=30))
    assert r.accepted and check(get_calculus(calc), r.derivation).ok
    assert r.derivation.sequent == d.sequent


def test_single_word_and_unknown_word():
    lex = load_lexicon("plain")
    r = s_recognize("malc*", lex, "John")
    assert r.accepted and r.derivation.rule.rule == "id"
    with pytest.raises(LexiconError):
        s_recognize("malc*", lex, "zzz")


def test_t_recognition_arguments():
    lex = load_lexicon("bracketed")
    with pytest.raises(ValueError):
        t_recognize("b2018st", lex, "John", max_bracket_pairs=-1)
    with pytest.raises(ValueError):
        t_recognize("malc*", lex, "John")
    with pytest.raises(LexiconError):
        t_recognize("b2018st", lex, "zzz")


def test_man_who_likes():
    lex = with_goal(load_lexicon("bracketed"), "CN")
    r = t_recognize("b2015st", lex, "man who likes", SearchBudget(max_depth=40, max_contractions=2), 4)
    assert r.accepted and check(get_calculus("b2015st"), r.derivation).ok
    assert erases_to(r.derivation.sequent, r.types)
    r = t_recognize("b2018st-prime-lr", lex, "man who likes", SearchBudget(max_depth=40, max_contractions=2), 4)
    assert r.verdict == "Underivable" and r.by_bound == {k: "Underivable" for k in range(5)}


def test_restricted_bracketings_have_no_empty_islands():
    for _, t in bracketings(3, 3, allow_empty=False):
        m = term_to_meta(t, [parse_formula(x) for x in "pqr"])
        assert lambek_restriction_holds(parse_sequent(f"{render(m)} => p"))


def test_render_bracketing():
    term = (0, ("b", (1, ("b", ()))))
    assert render_bracketing(term, ["a", "b"]) == "a [b [ ]]"


words = st.lists(st.sampled_from(["the", "paper", "John", "signed", "reading"]), min_size=1, max_size=3)


@settings(max_examples=40)
@given(words, st.sampled_from(["b2018st", "b2015st", "b2018"]))
def test_s_recognition_implies_bound_zero(ws, calc):
    lex = with_goal(load_lexicon("bracketed"), "S")
    budget = SearchBudget(max_depth=10, max_contractions=1, time_limit=1)
    s = s_recognize(calc, lex, ws, budget)
    t = t_recognize(calc, lex, ws, budget, 0)
    if s.accepted:
        assert t.accepted and t.bracketing == " ".join(ws)
    for r in (s, t):
        if r.accepted:
            assert check(get_calculus(calc), r.derivation).ok
            assert erases_to(r.derivation.sequent, r.types)


@settings(max_examples=40)
@given(words, st.integers(0, 2))
def test_accepted_sequents_erase_to_the_types(ws, k):
    lex = with_goal(load_lexicon("bracketed"), "<>N\\S")
    r = t_recognize("b2018st", lex, ws, SearchBudget(max_depth=10, max_contractions=1, time_limit=1), k)
    if r.accepted:
        assert erases_to(r.derivation.sequent, r.types)
        assert check(get_calculus("b2018st"), r.derivation).ok
