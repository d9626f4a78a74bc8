import pytest

from lambekbang import kernel
from lambekbang.calculi import get_calculus
from lambekbang.cutelim import (
    CutElimError,
    UnsupportedCalculus,
    cut_node,
    eliminate_cuts,
    eliminate_topmost_cut,
    measure_log_decreasing,
)
from lambekbang.kernel import check, cut_count
from lambekbang.search import Derivable, SearchBudget, search
from lambekbang.syntax import formula_size, parse_formula
from lambekbang.translate import enstoup_derivation

PRIMED = get_calculus("b2018st-prime")


def _eliminate(c, d):
    log = []
    out = eliminate_cuts(c, d, trace=log)
    return out, log


@pytest.mark.parametrize("name,calc", [("cut2015-primed", "b2015st-prime"), ("cut2018-primed", "b2018st-prime")])
def test_golden_cut_derivations(goldens, name, calc):
    d, _ = goldens[name]
    out, log = _eliminate(calc, d)
    assert cut_count(out) == 0
    assert out.sequent == d.sequent
    assert check(get_calculus(calc), out).ok
    assert log and measure_log_decreasing(log)


def test_unprimed_systems_are_refused(goldens):
    for name, calc in (("cut2018", "b2018st"), ("cut2015", "b2015st")):
        d, _ = goldens[name]
        with pytest.raises(UnsupportedCalculus):
            eliminate_cuts(calc, d)
    with pytest.raises(UnsupportedCalculus):
        eliminate_cuts("malc*", kernel.node("p => p", "id"))


def test_input_must_check(goldens):
    d, _ = goldens["cut2018-primed"]
    broken = kernel.Derivation(d.sequent, d.rule, tuple(reversed(d.children)))
    with pytest.raises(CutElimError):
        eliminate_cuts("b2018st-prime", broken)


def test_deep_step_introduces_one_cut_per_endpoint(goldens):
    for name, calc in (("cut2015-primed", "b2015st-prime"), ("cut2018-primed", "b2018st-prime")):
        d, _ = goldens[name]
        _, log = _eliminate(calc, d)
        deep = [s for s in log if s.case.startswith("deep")]
        assert deep
        for s in deep:
            assert s.detail["endpoints"] == s.detail["new_cuts"]
            # kappa is the size of !A and the new cuts are on A
            assert formula_size(parse_formula(s.detail["cut_formula"])) == s.kappa - 1


def test_topmost_cut_only(goldens):
    d, _ = goldens["cut2018-primed"]
    one = eliminate_topmost_cut("b2018st-prime", d)
    assert one.sequent == d.sequent
    assert check(PRIMED.with_cut(True), one).ok


def _proof(c, text):
    v = search(c, text, SearchBudget(max_depth=30, max_contractions=2, time_limit=5))
    assert isinstance(v, Derivable), text
    return v.derivation


# (left end-sequent, right end-sequent, zone path and index of the cut formula on the right)
CUT_PAIRS = [
    ("p => p * p / p", "p * p / p, p => p * p", (), 0),
    ("q, r => q * r", "p, q * r => p * (q * r)", (), 1),
    ("{p}; => !p", "!p, q => q * !p", (), 0),
    ("!p => !p", "!p, q => q * !p", (), 0),
    ("[p] => <>p", "<>p, <>p\\q => q", (), 0),
    ("{p}; [q] => <>q * !p", "<>q * !p => <>q * !p", (), 0),
    ("p => []<>p", "[[]<>p] => <>p", (0,), 0),
    ("!p => !!p", "!!p => !!p", (), 0),
    ("{p, q}; => !p * !q", "!p * !q => !p * !q", (), 0),
    ("{p}; [{p}; q] => p * <>(p*q)", "p * <>(p*q) => p * <>(p*q)", (), 0),
]


@pytest.mark.parametrize("left,right,path,idx", CUT_PAIRS)
def test_constructed_cuts(left, right, path, idx):
    dl, dr = _proof(PRIMED, left), _proof(PRIMED, right)
    d = cut_node(dl, dr, path, idx)
    assert check(PRIMED.with_cut(True), d).ok
    out, log = _eliminate(PRIMED, d)
    assert cut_count(out) == 0 and out.sequent == d.sequent
    assert check(PRIMED, out).ok
    assert measure_log_decreasing(log)


NO_STOUP = [
    "!p, !q/!p => q", "!(p\\p), p => p", "(p\\p)/p, !p, p => p", "!(q\\p), <>[]q => p",
    "!!p => !!!p", "!(q\\p) => p/!q", "!(p/p) => p\\p", "[[]q], !(q/q) => q", "!p, q => q*p",
    "!p => !((p\\p)\\p)", "[[]!p] => !!!p", "!p, !q => !q*!p", "!p, q, r => q*(r*p)", "[!p, q] => <>(q*p)",
]


@pytest.mark.parametrize("text", NO_STOUP)
def test_enstoup_then_eliminate(text):
    src = get_calculus("b2018")
    d = _proof(src, text)
    e = enstoup_derivation(d, src)
    assert check(PRIMED.with_cut(True), e).ok
    out, log = _eliminate(PRIMED, e)
    assert cut_count(out) == 0 and out.sequent == e.sequent == d.sequent
    assert check(PRIMED, out).ok
    assert measure_log_decreasing(log)
