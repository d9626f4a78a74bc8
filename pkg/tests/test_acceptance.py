"""Acceptance criteria, one test each; every test records a pass/fail line.

Run directly (``python3 tests/test_acceptance.py``) to see only these lines.
"""

import random
import sys
import time

import pytest

from lambekbang import encodings as E
from lambekbang.calculi import get_calculus
from lambekbang.cutelim import eliminate_cuts, measure_log_decreasing
from lambekbang.grammar import load_lexicon, t_recognize, with_goal
from lambekbang.kernel import check, cut_count
from lambekbang.search import Derivable, SearchBudget, Underivable, search
from lambekbang.syntax import (
    EMPTY_STOUP,
    BoxInv,
    Bang,
    Bracketed,
    Diamond,
    LeftDiv,
    MetaFormula,
    Product,
    RightDiv,
    Sequent,
    Var,
    has_stoups,
    lambek_restriction_holds,
    render,
    sequent_size,
)
from lambekbang.translate import (
    STOUP_FREE_PARTNER,
    destoup_derivation,
    enstoup_derivation,
    project_derivation,
)
from conftest import data_path, record_criterion

# derivations gathered by the criteria below, swept by the projection criterion
POOL: dict[str, list] = {}

ANBN = E.load_grammar(data_path("grammars/anbn.txt"))
WORDS = ("a b", "a a b b", "a a a b b b")
PHRASE = "the paper that John signed without reading"


def _report(n, checks, t0, limit=None):
    el = time.monotonic() - t0
    bad = [k for k, ok in checks if not ok]
    ok = not bad and (limit is None or el < limit)
    detail = f"{len(checks) - len(bad)}/{len(checks)} checks, {el:.2f}s"
    if limit is not None:
        detail += f" (limit {limit}s)"
    if bad:
        detail += "; failed: " + ", ".join(bad[:5])
    record_criterion(n, ok, detail)
    assert not bad, bad
    if limit is not None:
        assert el < limit, f"{el:.2f}s"


def _pool(tag, d):
    POOL.setdefault(tag, []).append(d)


def test_criterion_01_goldens(goldens):
    t0 = time.monotonic()
    checks = [(name, check(get_calculus(calc), d).ok) for name, (d, calc) in goldens.items()]
    expected = {"fig1": "!r-malc*+additives=off", "fig2": "b2018st", "fig3": "b2015st", "fig4": "b2018st",
                "cut2015": "b2015st+cut", "cut2018": "b2018st+cut"}
    checks += [(f"{n} calculus", goldens[n][1] == c) for n, c in expected.items()]
    _report(1, checks, t0, 1.0)


def test_criterion_02_counterexamples():
    t0 = time.monotonic()
    checks = []
    for calc, goal, want in (("b2018st", "!p, q => q * !p", Underivable),
                             ("b2018st-prime", "!p, q => q * !p", Derivable),
                             ("b2015st", "q => <>q", Underivable)):
        t = time.monotonic()
        v = search(calc, goal)
        el = time.monotonic() - t
        checks.append((f"{calc}: {goal} ({el:.2f}s, limit 5s)", isinstance(v, want) and el < 5))
        if isinstance(v, Derivable):
            checks.append((f"{calc} witness", check(get_calculus(calc), v.derivation).ok))
    _report(2, checks, t0)


# cut-free b2018 goals whose enstoup images carry cuts
ENSTOUP_GOALS = [
    "!p, !q/!p => q", "!(p\\p), p => p", "(p\\p)/p, !p, p => p", "!(q\\p), <>[]q => p",
    "!!p => !!!p", "!(q\\p) => p/!q", "!(p/p) => p\\p", "[[]q], !(q/q) => q", "!p, q => q*p",
    "!p => !((p\\p)\\p)", "[[]!p] => !!!p", "!p, !q => !q*!p", "!p, q, r => q*(r*p)", "[!p, q] => <>(q*p)",
    "!p*!q => !q*!p", "!q => !!q", "!!p, !q/p => q", "!p => !!!p", "!(p\\p), !p => p", "!(q\\p) => p/q",
    "q, !p => p * q", "!p, [[q]] => p * <>(p*q)",
]


def test_criterion_03_cut_elimination(goldens):
    t0 = time.monotonic()
    jobs = [("cut2015-primed", goldens["cut2015-primed"][0], "b2015st-prime"),
            ("cut2018-primed", goldens["cut2018-primed"][0], "b2018st-prime")]
    b2018 = get_calculus("b2018")
    for goal in ENSTOUP_GOALS:
        v = search(b2018, goal, SearchBudget(max_depth=30, max_contractions=2, time_limit=5))
        if isinstance(v, Derivable):
            jobs.append((goal, enstoup_derivation(v.derivation, b2018), "b2018st-prime"))
    primed = {"b2018st": "b2018st-prime", "b2015st": "b2015st-prime", "b2018st-prime-lr": "b2018st-prime-lr"}
    for name in ("fig2", "fig2-restricted", "fig3", "fig4"):
        d, calc = goldens[name]
        flat = destoup_derivation(d, calc)
        _pool("destouped goldens", flat)
        jobs.append((name, enstoup_derivation(flat, STOUP_FREE_PARTNER[calc]), primed[calc]))
    generated = [j for j in jobs[2:] if cut_count(j[1]) > 0]
    checks = [("at least 20 enstoup cut derivations", len(generated) >= 20)]
    for name, d, calc in jobs:
        log = []
        out = eliminate_cuts(calc, d, trace=log)
        ok = (cut_count(out) == 0 and out.sequent == d.sequent and check(get_calculus(calc), out).ok
              and bool(log) and measure_log_decreasing(log))
        checks.append((name, ok))
    _report(3, checks, t0, 30.0)


ATOMS = (Var("p"), Var("q"))


def _formula(rng, depth):
    if depth == 0 or rng.random() < 0.35:
        return rng.choice(ATOMS)
    k = rng.choice("ldpb<[")
    if k in "ldp":
        cls = {"l": LeftDiv, "d": RightDiv, "p": Product}[k]
        return cls(_formula(rng, depth - 1), _formula(rng, depth - 1))
    return {"b": Bang, "<": Diamond, "[": BoxInv}[k](_formula(rng, depth - 1))


def _item(rng):
    if rng.random() < 0.2:
        return Bracketed(MetaFormula(EMPTY_STOUP, tuple(_formula(rng, 2) for _ in range(rng.randint(1, 2)))))
    return _formula(rng, 2)


def test_criterion_04_stoup_equivalence():
    t0 = time.monotonic()
    rng = random.Random(11)
    budget = SearchBudget(max_depth=20, max_contractions=1, max_sequent_size=30, time_limit=0.5)
    b2018, primed = get_calculus("b2018"), get_calculus("b2018st-prime")
    found, tried = [], 0
    while len(found) < 50 and tried < 40000:
        tried += 1
        ant = tuple(_item(rng) for _ in range(rng.randint(1, 4)))
        s = Sequent(MetaFormula(EMPTY_STOUP, ant), _formula(rng, 3))
        if sequent_size(s) > 10:
            continue
        v = search(b2018, s, budget)
        if isinstance(v, Derivable) and v.derivation.height() >= 3:
            found.append((s, v.derivation))
    checks = [("50 derivable samples", len(found) == 50)]
    for s, d in found:
        _pool("criterion 4 (b2018)", d)
        # b2018 => primed, constructively and by search
        out = eliminate_cuts(primed, enstoup_derivation(d, b2018))
        w = search(primed, s, budget)
        ok = check(primed, out).ok and out.sequent == s and isinstance(w, Derivable)
        # primed => b2018 on the searched witness
        if isinstance(w, Derivable):
            back = destoup_derivation(w.derivation, primed, b2018)
            ok = ok and check(b2018, back).ok and back.sequent == s
            _pool("criterion 4 (destouped)", back)
        checks.append((render(s), ok))
    _report(4, checks, t0)


def _synthesized_pool():
    for scheme in ("b2015", "b2018"):
        for w in WORDS:
            _pool(f"synthesis {scheme}", E.synthesize_sequent_derivation(ANBN, w, scheme))
        _pool(f"recognition {scheme}", E.recognition_derivation(ANBN, "a b", scheme))


def test_criterion_05_projection_sweep(goldens):
    t0 = time.monotonic()
    _synthesized_pool()
    if "destouped goldens" not in POOL:
        for name in ("fig2", "fig2-restricted", "fig3", "fig4"):
            d, calc = goldens[name]
            _pool("destouped goldens", destoup_derivation(d, calc))
    full = get_calculus("!malc*")
    checks = []
    for tag, ds in POOL.items():
        for k, d in enumerate(ds):
            if any(has_stoups(n.sequent.antecedent) for _, n in d.nodes()):
                continue
            for mode in ("pi", "pi_q"):
                p = project_derivation(d, mode, "q")
                checks.append((f"{tag} #{k} {mode}", check(full, p).ok))
    checks.append(("sweep is not empty", bool(checks)))
    _report(5, checks, t0)


def test_criterion_06_lambek_restriction(goldens):
    t0 = time.monotonic()
    lr = get_calculus("b2018st-prime-lr")
    fig4, _ = goldens["fig4"]
    fig2r, calc = goldens["fig2-restricted"]
    checks = [("fig4 rejected", not check(lr, fig4).ok),
              ("fig2 transcription accepted", calc == "b2018st-prime-lr" and check(lr, fig2r).ok)]
    accepted = [fig2r]
    flat = destoup_derivation(fig2r, lr)
    checks.append(("fig2 destouped in b2018-lr", check(get_calculus("b2018-lr"), flat).ok))
    accepted.append(flat)
    for w in WORDS:
        d = E.synthesize_sequent_derivation(ANBN, w, "b2018")
        checks.append((f"synthesis {w} in b2018-lr", check(get_calculus("b2018-lr"), d).ok))
        accepted.append(d)
    for d in accepted:
        checks.append((render(d.sequent)[:40], all(lambek_restriction_holds(n.sequent) for _, n in d.nodes())))
    _report(6, checks, t0)


def test_criterion_07_encodings():
    t0 = time.monotonic()
    checks = []
    for scheme in ("b2015", "b2018", "b2018st"):
        st = E.internalization_selftest(E.grammar_internalization(ANBN, scheme))
        checks.append((f"selftest {scheme}", st.ok))
    lr = get_calculus("b2018-lr")
    for scheme in ("b2015", "b2018", "b2018st"):
        c = get_calculus(E.SCHEME_CALCULUS[scheme])
        for w in WORDS:
            m = E.rewrite_search(ANBN, w)
            d = E.synthesize_sequent_derivation(ANBN, w, scheme, trace=m.trace)
            checks.append((f"{scheme} {w}", m.member is True and check(c, d).ok))
            if scheme == "b2018":
                ok = check(lr, d).ok and all(lambek_restriction_holds(n.sequent) for _, n in d.nodes())
                checks.append((f"{scheme} {w} restricted", ok))
    for w in ("b a", "a b b", "a a b", ""):
        checks.append((f"non-member {w!r}", E.rewrite_search(ANBN, w).member is False))
    _report(7, checks, t0, 60.0)


def test_criterion_08_buszkowski():
    t0 = time.monotonic()
    rules = E.buszkowski_rules(ANBN)
    cb = E.brules_derivation_calculus(ANBN)
    checks = [("equivalence selftest", E.brule_equivalence_selftest(rules).ok)]
    for w in WORDS:
        d = E.synthesize_sequent_derivation(ANBN, w, "buszkowski")
        checks.append((w, check(cb, d).ok and render(d.sequent) == f"{', '.join(w.split())} => s"))
    bc = E.brule_calculus(rules)
    for k, r in enumerate(rules):
        d = E.bformula_axiom_derivation(r, rules, k)
        checks.append((f"B-axiom {k}", check(bc, d).ok and d.sequent == Sequent(MetaFormula(EMPTY_STOUP, ()),
                                                                                  E.b_formula(r))))
    _report(8, checks, t0, 30.0)


def test_criterion_09_grammar_frontend():
    t0 = time.monotonic()
    lex = load_lexicon("bracketed")
    budget = SearchBudget(max_depth=40, max_contractions=2)
    r = t_recognize("b2018st", lex, PHRASE, budget, 4)
    checks = [("fig2 phrase accepted in b2018st", r.accepted and check(get_calculus("b2018st"), r.derivation).ok)]
    cn = with_goal(lex, "CN")
    r = t_recognize("b2015st", cn, "man who likes", budget, 4)
    checks.append(("man who likes in b2015st", r.accepted and check(get_calculus("b2015st"), r.derivation).ok))
    r = t_recognize("b2018st-prime-lr", cn, "man who likes", budget, 4)
    checks.append(("man who likes rejected in b2018st-prime-lr",
                   r.verdict == "Underivable" and all(r.by_bound.get(k) == "Underivable" for k in range(5))))
    _report(9, checks, t0, 60.0)


def test_criterion_10_property_suites(goldens):
    import test_calculi
    import test_kernel
    import test_syntax

    t0 = time.monotonic()
    checks = []
    for name, fn in (("round trip x1000", test_syntax.test_formula_round_trip),
                     ("coherence x500", test_calculi.test_forward_backward_coherence)):
        try:
            fn()
            checks.append((name, True))
        except AssertionError:
            checks.append((name, False))
    try:
        test_kernel.test_subformula_property_on_cut_free_goldens(goldens)
        checks.append(("subformula property on goldens", True))
    except AssertionError:
        checks.append(("subformula property on goldens", False))
    _report(10, checks, t0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s", "-p", "no:cacheprovider"]))
