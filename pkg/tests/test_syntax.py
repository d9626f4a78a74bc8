import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambekbang.syntax import (
    UNIT,
    Bang,
    Bracketed,
    Diamond,
    LeftDiv,
    MetaFormula,
    PathError,
    Product,
    RightDiv,
    Sequent,
    Stoup,
    SyntaxError_,
    Var,
    ZonePath,
    bracket_count,
    erase_brackets,
    lambek_restriction_holds,
    parse_formula,
    parse_meta,
    parse_sequent,
    render,
    replace_zone,
    subformula_closure,
    zone_at,
)
from oracles import closure_by_descent, restriction_by_hand
from strategies import FULL_FORMULAS, FULL_SEQUENTS, formulas, sequents

p, q, r = Var("p"), Var("q"), Var("r")


def test_parse_basic_connectives():
    assert parse_formula("(N\\S)/N") == RightDiv(LeftDiv(Var("N"), Var("S")), Var("N"))
    assert parse_formula("!<>[]p") == Bang(Diamond(parse_formula("[]p")))
    assert parse_formula("p * q") == Product(p, q)
    assert parse_formula("1") == UNIT


def test_division_is_left_associative():
    assert parse_formula("p/q/r") == RightDiv(RightDiv(p, q), r)
    assert parse_formula("p\\q\\r") == LeftDiv(LeftDiv(p, q), r)


def test_unary_binds_tighter_than_product_and_product_tighter_than_division():
    assert parse_formula("!p*q") == Product(Bang(p), q)
    assert parse_formula("p*q/r") == RightDiv(Product(p, q), r)


def test_parse_sequent_with_stoup_and_brackets():
    s = parse_sequent("{N}; [N], (<>N\\S)/N => S")
    assert s.antecedent.stoup == Stoup((Var("N"),))
    assert s.antecedent.items[0] == Bracketed(MetaFormula(Stoup(()), (Var("N"),)))
    assert s.antecedent.items[1] == parse_formula("(<>N\\S)/N")
    assert s.succedent == Var("S")


def test_empty_antecedent_and_unit():
    s = parse_sequent("=> 1")
    assert s.antecedent.is_empty() and s.succedent == UNIT


def test_bracketed_items():
    s = parse_sequent("[p], q => <>p * q")
    assert s.antecedent.items == (Bracketed(MetaFormula(Stoup(()), (p,))), q)


@pytest.mark.parametrize("bad", ["p =>", "(p", "p & ", "=> p q", "[p => p", "p ? q => r"])
def test_parse_errors(bad):
    with pytest.raises(SyntaxError_):
        parse_sequent(bad)


def test_render_examples():
    assert render(parse_formula("(N\\S)/N")) == "(N\\S)/N"
    assert render(MetaFormula()) == ""
    assert render(MetaFormula(Stoup((p, q)), ())) == "{p, q};"


def test_fixture_round_trips(goldens):
    for d, _ in goldens.values():
        for _, n in d.nodes():
            assert parse_sequent(render(n.sequent)) == n.sequent


@settings(max_examples=1000)
@given(FULL_FORMULAS)
def test_formula_round_trip(f):
    assert parse_formula(render(f)) == f


@settings(max_examples=300)
@given(FULL_SEQUENTS)
def test_sequent_round_trip(s):
    assert parse_sequent(render(s)) == s


@given(st.lists(formulas(max_leaves=3), max_size=5), st.randoms())
def test_stoup_multiset_law(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert Stoup(tuple(xs)) == Stoup(tuple(ys))
    assert hash(Stoup(tuple(xs))) == hash(Stoup(tuple(ys)))
    m1 = MetaFormula(Stoup(tuple(xs)), (p,))
    m2 = MetaFormula(Stoup(tuple(ys)), (p,))
    assert m1 == m2


def test_stoup_is_not_a_set():
    assert Stoup((p, p)) != Stoup((p,))


def test_subformula_closure_examples():
    assert subformula_closure(parse_sequent("p/q, q => p")) == {parse_formula("p/q"), p, q}
    assert subformula_closure(parse_sequent("!p => !p")) == {Bang(p), p}


def test_subformula_closure_of_fig1_matches_descent(goldens):
    s = goldens["fig1"][0].sequent
    got = subformula_closure(s)
    assert got == closure_by_descent(s)
    for text in ("S/!N", "!N", "N", "CN\\CN", "N\\S", "(N\\S)\\(N\\S)"):
        assert parse_formula(text) in got
    # N/CN, N, CN, (CN\CN)/(S/!N), CN\CN, S/!N, S, !N, (N\S)/N, N\S,
    # ((N\S)\(N\S))/(N\S), (N\S)\(N\S)
    assert len(got) == 12


@given(FULL_SEQUENTS)
def test_closure_agrees_with_descent(s):
    assert subformula_closure(s) == closure_by_descent(s)


def test_zone_access():
    s = parse_sequent("[p], q => r")
    assert zone_at(s, [0]) == parse_meta("p")
    assert replace_zone(s, [0], parse_meta("p, p")) == parse_sequent("[p, p], q => r")
    with pytest.raises(PathError):
        zone_at(s, [5])
    with pytest.raises(PathError):
        zone_at(s, ZonePath((0,), span=(0, 3)))


@given(FULL_SEQUENTS)
def test_replace_zone_by_itself_is_identity(s):
    from lambekbang.syntax import zones

    for path, z in zones(s.antecedent):
        assert replace_zone(s, path, z) == s


def test_lambek_restriction_examples():
    assert lambek_restriction_holds(parse_sequent("p => p"))
    assert not lambek_restriction_holds(parse_sequent("CN, [[ p, [[ ]], q ]] => CN"))
    assert lambek_restriction_holds(parse_sequent("{p}; => p"))
    assert not lambek_restriction_holds(parse_sequent("=> p"))
    assert not lambek_restriction_holds(parse_sequent("1, p => p"))


@given(FULL_SEQUENTS)
def test_restriction_agrees_with_hand_oracle(s):
    assert lambek_restriction_holds(s) == restriction_by_hand(s)


unit_free = formulas(max_leaves=4, unit=False)


@given(sequents(unit_free), unit_free, st.data())
def test_restriction_monotone_under_insertion(s, f, data):
    # inserting unit-free material never empties a zone
    from lambekbang.syntax import zones

    zs = list(zones(s.antecedent))
    path, z = data.draw(st.sampled_from(zs))
    k = data.draw(st.integers(0, len(z.items)))
    grown = replace_zone(s, path, z.with_items(z.items[:k] + (f,) + z.items[k:]))
    if lambek_restriction_holds(s):
        assert lambek_restriction_holds(grown)


def test_erase_and_count():
    m = parse_meta("p, [[q, [r]]]")
    assert erase_brackets(m) == [p, q, r]
    assert bracket_count(m) == 3


def test_values_are_hashable_and_picklable():
    import pickle

    s = parse_sequent("{p, q}; [r], !p => p * q")
    assert pickle.loads(pickle.dumps(s)) == s
    assert hash(pickle.loads(pickle.dumps(s))) == hash(s)
    assert len({s, parse_sequent("{q, p}; [r], !p => p * q")}) == 1
    assert Sequent(s.antecedent, s.succedent) == s
