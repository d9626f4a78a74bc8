"""Write the golden derivation files under src/lambekbang/data/golden/.

Each derivation is transcribed by hand, node by node, with explicit rule
parameters. Run from the repository root: ``python3 tools/build_golden.py``.
"""

from __future__ import annotations

from pathlib import Path

from lambekbang.kernel import check, dump, node as n
from lambekbang.calculi import get_calculus

OUT = Path(__file__).resolve().parents[1] / "src" / "lambekbang" / "data" / "golden"


def ax(s: str):
    return n(s, "id")


# --- relative clause with parasitic gap, no brackets (relevant modality) ---
THE, PAPER, J = "N/CN", "CN", "N"
THAT1 = "(CN\\CN)/(S/!N)"
SIGNED1 = READ1 = "(N\\S)/N"
W1 = "((N\\S)\\(N\\S))/(N\\S)"


def fig1():
    vp = "N\\S"
    core = n(f"N, {vp} => S", "\\L", ax("N => N"), ax("S => S"), index=1, split=0)
    step = n(f"N, {vp}, ({vp})\\({vp}) => S", "\\L", ax(f"{vp} => {vp}"), core, index=2, split=1)
    step = n(f"N, {vp}, {W1}, {vp} => S", "/L", ax(f"{vp} => {vp}"), step, index=2, split=4)
    step = n(f"N, {vp}, {W1}, {READ1}, N => S", "/L", ax("N => N"), step, index=3, split=5)
    step = n(f"N, {SIGNED1}, N, {W1}, {READ1}, N => S", "/L", ax("N => N"), step, index=1, split=3)
    step = n(f"N, {SIGNED1}, N, {W1}, {READ1}, !N => S", "!L", step, index=5)
    step = n(f"N, {SIGNED1}, !N, {W1}, {READ1}, !N => S", "!L", step, index=2)
    step = n(f"N, {SIGNED1}, {W1}, {READ1}, !N => S", "!NC1", step, index=4, split=2)
    left = n(f"N, {SIGNED1}, {W1}, {READ1} => S/!N", "/R", step)
    inner = n(f"{THE}, {PAPER} => N", "/L", ax("CN => CN"), ax("N => N"), index=0, split=2)
    right = n(f"{THE}, {PAPER}, CN\\CN => N", "\\L", ax("CN => CN"), inner, index=2, split=1)
    return n(f"{THE}, {PAPER}, {THAT1}, {J}, {SIGNED1}, {W1}, {READ1} => N", "/L",
             left, right, index=2, split=7)


# --- bracketed lexicon ---
VP = "<>N\\S"
TV = f"({VP})/N"
THAT = "([][](CN\\CN))/(S/!N)"
W = f"([](({VP})\\({VP})))/({VP})"


def np_subject_tail():
    """[N], <>N\\S => S"""
    return n(f"[N], {VP} => S", "\\L", n("[N] => <>N", "<>R", ax("N => N")), ax("S => S"),
             index=1, split=0)


def relative_right(head: str):
    """head, [[ [][](CN\\CN) ]] => CN by two []L and \\L."""
    base = n(f"{head}, CN\\CN => CN", "\\L", ax("CN => CN"), ax("CN => CN"), index=1, split=0)
    one = n(f"{head}, [[](CN\\CN)] => CN", "[]L", base, index=1)
    return n(f"{head}, [[[][](CN\\CN)]] => CN", "[]L", one, path=(1,), index=0)


def fig2(contraction: str = "!C"):
    s = n(f"[N], {VP}, ({VP})\\({VP}) => S", "\\L", ax(f"{VP} => {VP}"), np_subject_tail(),
          index=2, split=1)
    s = n(f"[N], {TV}, N, ({VP})\\({VP}) => S", "/L", ax("N => N"), s, index=1, split=3)
    s = n(f"[N], {TV}, N, [[](({VP})\\({VP}))] => S", "[]L", s, index=3)
    s = n(f"[N], {TV}, N, [{W}, {VP}] => S", "/L", ax(f"{VP} => {VP}"), s, path=(3,), index=0, split=2)
    s = n(f"[N], {TV}, N, [{W}, {TV}, N] => S", "/L", ax("N => N"), s, path=(3,), index=1, split=3)
    s = n(f"[N], {TV}, N, [{{N}}; {W}, {TV}] => S", "!P", s, path=(3,), stoup_index=0, split=2)
    s = n(f"{{N}}; [N], {TV}, [{{N}}; {W}, {TV}] => S", "!P", s, stoup_index=0, split=2)
    s = n(f"{{N}}; [N], {TV}, [[{W}, {TV}]] => S", contraction, s, stoup_index=0, target=2)
    s = n(f"[N], {TV}, [[{W}, {TV}]], !N => S", "!L", s, index=3)
    left = n(f"[N], {TV}, [[{W}, {TV}]] => S/!N", "/R", s)
    clause = n(f"CN, [[{THAT}, [N], {TV}, [[{W}, {TV}]]]] => CN", "/L",
               left, relative_right("CN"), path=(1, 0), index=0, split=4)
    return n(f"N/CN, CN, [[{THAT}, [N], {TV}, [[{W}, {TV}]]]] => N", "/L",
             clause, ax("N => N"), index=0, split=3)


def man_who_likes_2015():
    s = n(f"[N], {TV}, N => S", "/L", ax("N => N"), np_subject_tail(), index=1, split=3)
    s = n(f"[{{N}};], {TV}, N => S", "!P", s, path=(0,), stoup_index=0, split=0)
    s = n(f"{{N}}; [{{N}};], {TV} => S", "!P", s, stoup_index=0, split=2)
    s = n(f"{{N}}; {TV} => S", "!C", s, stoup=(0,), span=(0, 0))
    s = n(f"{TV}, !N => S", "!L", s, index=1)
    left = n(f"{TV} => S/!N", "/R", s)
    return n(f"CN, [[{THAT}, {TV}]] => CN", "/L", left, relative_right("CN"),
             path=(1, 0), index=0, split=2)


def man_who_likes_2018():
    s = n(f"[N], {TV}, N => S", "/L", ax("N => N"), np_subject_tail(), index=1, split=3)
    s = n(f"[{{N}};], {TV}, N => S", "!P", s, path=(0,), stoup_index=0, split=0)
    s = n(f"{{N}}; [{{N}};], {TV} => S", "!P", s, stoup_index=0, split=2)
    s = n(f"{{N}}; [[ ]], {TV} => S", "!C", s, stoup_index=0, target=0)
    s = n(f"[[ ]], {TV}, !N => S", "!L", s, index=2)
    left = n(f"[[ ]], {TV} => S/!N", "/R", s)
    return n(f"CN, [[{THAT}, [[ ]], {TV}]] => CN", "/L", left, relative_right("CN"),
             path=(1, 0), index=0, split=3)


# --- cut counterexamples ---
def commute_premise():
    """!!p, q => q*!p  by !L, !P, *R."""
    s = n("q, !p => q*!p", "*R", ax("q => q"), ax("!p => !p"), split=1)
    s = n("{!p}; q => q*!p", "!P", s, stoup_index=0, split=1)
    return n("!!p, q => q*!p", "!L", s, index=0)


def cut2018():
    left = n("!p => !!p", "!R", ax("!p => !p"))
    return n("!p, q => q*!p", "cut", left, commute_premise(), span=(0, 1), cut_formula="!!p")


def promote_primed(a: str):
    """A; => !A  by !R' over !P over the axiom."""
    return n(f"{{{a}}}; => !{_paren(a)}", "!R'",
             n(f"{{{a}}}; => {a}", "!P", ax(f"{a} => {a}"), stoup_index=0, split=0))


def _paren(a: str) -> str:
    return a if a.replace("!", "").isalnum() else f"({a})"


def cut2018_primed():
    # the old !R step rebuilt from !R' plus a cut with the promotion lemma
    mid = n("{p}; => !p", "cut", promote_primed("p"), ax("!p => !p"),
            span=(0, 0), stoup=(0,), cut_formula="!p")
    left = n("!p => !!p", "!L", n("{p}; => !!p", "!R'", mid), index=0)
    return n("!p, q => q*!p", "cut", left, commute_premise(), span=(0, 1), cut_formula="!!p")


def unit_island(contraction: str):
    s = n("[q] => <>q", "<>R", ax("q => q"))
    s = n("[1, q] => <>q", "1L", s, path=(0,), index=0)
    s = n("1, [1, q] => <>q", "1L", s, index=0)
    s = n("1, [{1}; q] => <>q", "!P", s, path=(1,), stoup_index=0, split=0)
    s = n("{1}; [{1}; q] => <>q", "!P", s, stoup_index=0, split=0)
    s = n("{1}; q => <>q", contraction, s, stoup=(0,), span=(0, 1))
    return n("!1, q => <>q", "!L", s, index=0)


def cut2015():
    left = n("=> !1", "!R", n("=> 1", "1R"))
    return n("q => <>q", "cut", left, unit_island("!C"), span=(0, 0), cut_formula="!1")


def cut2015_primed():
    one = n("1 => 1", "1L", n("=> 1", "1R"), index=0)
    left = n("{1}; => !1", "!R'", n("{1}; => 1", "!P", one, stoup_index=0, split=0))
    mid = n("{1}; q => <>q", "cut", left, unit_island("!C'"), span=(0, 0), stoup=(0,), cut_formula="!1")
    return n("!1, q => <>q", "!L", mid, index=0)


GOLDEN = {
    "fig1": (fig1, "!r-malc*+additives=off", "the paper that John signed without reading (no brackets)"),
    "fig2": (fig2, "b2018st", "the paper that John signed without reading (brackets, stoups)"),
    "fig2-restricted": (lambda: fig2("!C'"), "b2018st-prime-lr", "fig2 with the primed contraction"),
    "fig3": (man_who_likes_2015, "b2015st", "man who likes, 2015 contraction"),
    "fig4": (man_who_likes_2018, "b2018st", "man who likes with an explicit empty island"),
    "cut2018": (cut2018, "b2018st+cut", "commuting a !-formula, needs cut"),
    "cut2015": (cut2015, "b2015st+cut", "q => <>q, needs cut"),
    "cut2018-primed": (cut2018_primed, "b2018st-prime+cut", "cut2018 in the primed 2018 system"),
    "cut2015-primed": (cut2015_primed, "b2015st-prime+cut", "cut2015 shape in the primed 2015 system"),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, (build, calc, note) in GOLDEN.items():
        d = build()
        res = check(get_calculus(calc), d)
        if not res.ok:
            raise SystemExit(f"{name}: {res}")
        dump(d, OUT / f"{name}.json", calculus=calc, description=note)
        print(f"{name}: ok in {calc}")


if __name__ == "__main__":
    main()
