import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lambekbang import search as S
from lambekbang import translate
from lambekbang.calculi import get_calculus
from lambekbang.kernel import check
from lambekbang.search import (
    CONTRACTION_RULES,
    Derivable,
    SearchBudget,
    Searcher,
    Underivable,
    Unknown,
    bracket_feasible,
    contraction_demand,
    count_feasible,
    is_derivable,
    search,
)
from lambekbang.syntax import parse_sequent
from strategies import for_calculus

SMALL = SearchBudget(max_depth=12, max_contractions=1, max_sequent_size=30, time_limit=0.5)


def _contractions(d) -> int:
    return sum(1 for _, n in d.nodes() if n.rule.rule in CONTRACTION_RULES)


def test_counterexamples():
    assert isinstance(search("b2018st", "!p, q => q * !p"), Underivable)
    assert isinstance(search("b2018st-prime", "!p, q => q * !p"), Derivable)
    assert isinstance(search("b2015st", "q => <>q"), Underivable)


def test_witness_checks():
    for c, goal in [("b2018st-prime", "!p, q => q * !p"), ("!malc*", "!p => p * p"),
                    ("!r-malc*", "!p, q => q * p"), ("malc*", "p & q => q | p"),
                    ("b2018", "[[]p] => p"), ("l*(/)", "p/q, q/r => p/r")]:
        v = search(c, goal)
        assert isinstance(v, Derivable), (c, goal)
        assert check(get_calculus(c), v.derivation).ok
        assert v.derivation.sequent == parse_sequent(goal)


def test_relevant_has_no_weakening():
    # contraction keeps the space infinite, so only "not derivable here" can be asserted
    assert not isinstance(search("!r-malc*", "!q, p => p"), Derivable)
    assert isinstance(search("!malc*", "!q, p => p"), Derivable)


def test_depth_cap_gives_unknown():
    v = search("malc*", "p/q, q/r, r/s, s => p", SearchBudget(max_depth=2))
    assert isinstance(v, Unknown) and "max_depth" in v.caps


def test_contraction_cap_gives_unknown_not_underivable(goldens):
    d, _ = goldens["fig2"]
    v = search("b2018st", d.sequent, SearchBudget(max_contractions=0))
    assert isinstance(v, Unknown) and "max_contractions" in v.caps


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(max_depth=-1)
    with pytest.raises(ValueError):
        SearchBudget(time_limit=0)
    with pytest.raises(ValueError):
        search("b2018st+cut", "p => p")


def test_is_derivable():
    assert is_derivable("malc*", "p => p") is True
    assert is_derivable("malc*", "p => q") is False
    assert is_derivable("malc*", "p/q, q/r, r/s, s => p", SearchBudget(max_depth=2)) is None


@pytest.mark.parametrize("prune", [True, False])
def test_golden_goals_never_underivable(goldens, prune):
    for name, (d, calc) in goldens.items():
        c = get_calculus(calc).with_cut(False)
        for budget in (SearchBudget(max_depth=3, max_contractions=0, time_limit=5),
                       SearchBudget(max_depth=8, max_contractions=1, time_limit=5),
                       SearchBudget(max_depth=40, max_contractions=2, time_limit=20)):
            if name.startswith("cut2") and c.features.bang_profile.startswith("morrill"):
                continue  # these end-sequents have no cut-free derivation
            v = search(c, d.sequent, budget, prune_ancestors=prune)
            assert not isinstance(v, Underivable), (name, budget)


def test_golden_goals_found_with_default_budget(goldens):
    for name in ("fig1", "fig2", "fig2-restricted", "fig3", "fig4", "cut2015-primed", "cut2018-primed"):
        d, calc = goldens[name]
        c = get_calculus(calc).with_cut(False)
        v = search(c, d.sequent, SearchBudget(time_limit=30))
        assert isinstance(v, Derivable), name
        assert check(c, v.derivation).ok


def test_pruned_and_unpruned_agree_on_fixtures(goldens):
    goals = [(calc, d.sequent) for d, calc in goldens.values()]
    goals += [("b2018st", parse_sequent("!p, q => q * !p")), ("b2015st", parse_sequent("q => <>q"))]
    for calc, goal in goals:
        c = get_calculus(calc).with_cut(False)
        a = search(c, goal, SMALL, prune_ancestors=True)
        b = search(c, goal, SMALL, prune_ancestors=False)
        if isinstance(b, Derivable):
            assert isinstance(a, Derivable), (calc, str(goal))
        if isinstance(a, Underivable):
            assert not isinstance(b, Derivable)


def _stoup_goldens(goldens):
    for name, (d, calc) in goldens.items():
        c = get_calculus(calc)
        if c.features.has_brackets and not d.rules_used() & {"cut"}:
            yield name, d, c
            flat = translate.destoup_derivation(d, c)
            yield name + "-flat", flat, get_calculus(translate.STOUP_FREE_PARTNER[calc])


def test_contraction_demand_counts_contractions(goldens):
    for name, d, c in _stoup_goldens(goldens):
        for path, n in d.nodes():
            k = contraction_demand(c, n.sequent)
            if k is not None:
                assert k == _contractions(n), (name, path)


def test_filters_accept_every_golden_node(goldens):
    for name, d, c in _stoup_goldens(goldens):
        for path, n in d.nodes():
            assert count_feasible(n.sequent), (name, path)
            assert bracket_feasible(c, n.sequent, _contractions(n)), (name, path)


def test_demand_examples():
    c = get_calculus("b2018st")
    assert contraction_demand(c, parse_sequent("!p, q => q * !p")) == 0
    assert contraction_demand(get_calculus("b2015st"), parse_sequent("q => <>q")) == 1
    assert contraction_demand(get_calculus("b2015st-prime"), parse_sequent("q => <>q")) == 1


def test_searcher_shares_work():
    eng = Searcher("b2018st")
    first = eng.run("!p, q => q * !p")
    again = eng.run("!p, q => q * !p")
    assert type(first) is type(again) is Underivable
    assert again.stats.expanded <= first.stats.expanded


calcs = st.sampled_from(["malc*", "!malc*", "!r-malc*", "b2015", "b2018", "b2015st", "b2018st",
                         "b2018st-prime", "b2015st-prime", "b2018-lr"]).map(get_calculus)


@settings(max_examples=150)
@given(st.data())
def test_derivable_witnesses_always_check(data):
    c = data.draw(calcs)
    goal = data.draw(for_calculus(c, max_items=3, depth=1))
    v = search(c, goal, SMALL)
    if isinstance(v, Derivable):
        assert v.derivation.sequent == goal
        assert check(c, v.derivation).ok


@settings(max_examples=100)
@given(st.data())
def test_filters_never_refute_a_provable_goal(data):
    """Unfiltered search is the oracle: no filtered Underivable may be unfiltered Derivable."""
    c = data.draw(calcs)
    goal = data.draw(for_calculus(c, max_items=3, depth=1))
    filtered = search(c, goal, SMALL)
    if not isinstance(filtered, Underivable):
        return
    saved = S.contraction_demand, S.count_feasible, S.bracket_feasible
    try:
        S.contraction_demand = lambda c, s: None
        S.count_feasible = lambda s: True
        S.bracket_feasible = lambda c, s, b: True
        plain = search(c, goal, SMALL)
    finally:
        S.contraction_demand, S.count_feasible, S.bracket_feasible = saved
    assert not isinstance(plain, Derivable), str(goal)
