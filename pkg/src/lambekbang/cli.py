"""Command line: check, search, cutelim, project, destoup, enstoup, encode, parse.

Exit codes: 0 success (Derivable, check ok, accepted), 1 negative answer
(Underivable, check failed, selftest failed), 2 Unknown (a budget cap fired),
3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cutelim, encodings, grammar, kernel, search, translate
from .calculi import get_calculus
from .syntax import parse_formula, parse_sequent, render_sequent

EXIT = {"Derivable": 0, "Underivable": 1, "Unknown": 2}
BAD_INPUT = 3


class _Out:
    def __init__(self, fmt: str):
        self.json = fmt == "json"
        self.record: dict = {}

    def say(self, text: str = "", **fields):
        self.record.update(fields)
        if not self.json and text:
            print(text)

    def done(self, code: int) -> int:
        if self.json:
            print(json.dumps({**self.record, "exit": code}, ensure_ascii=False))
        return code


def _text_arg(value: str) -> str:
    return Path(value[1:]).read_text().strip() if value.startswith("@") else value


def _budget(a) -> search.SearchBudget:
    return search.SearchBudget(max_depth=a.max_depth, max_contractions=a.max_contractions,
                               max_sequent_size=a.max_size, time_limit=a.time_limit)


def _write(d, path: str | None, out: _Out, key: str = "derivation"):
    if path:
        kernel.dump(d, path)
        out.say(f"wrote {path}", **{f"{key}_file": path})
    else:
        out.say("\n".join(kernel.pretty_lines(d)))
    if out.json:
        out.record[key] = kernel.to_json(d)


def cmd_check(a, out: _Out) -> int:
    c = get_calculus(a.calculus)
    d = kernel.load(a.derivation)
    res = kernel.check(c, d)
    out.say(repr(res), ok=res.ok, error=None if res.ok else str(res.error), sequent=render_sequent(d.sequent),
            cuts=kernel.cut_count(d))
    return 0 if res.ok else 1


def cmd_search(a, out: _Out) -> int:
    goal = parse_sequent(_text_arg(a.sequent))
    v = search.search(a.calculus, goal, _budget(a), prune_ancestors=not a.no_prune)
    out.say(v.verdict, verdict=v.verdict, expanded=v.stats.expanded, elapsed=round(v.stats.elapsed, 4))
    if isinstance(v, search.Unknown):
        out.say("caps: " + ", ".join(v.caps), caps=list(v.caps))
    if isinstance(v, search.Derivable) and (a.emit_derivation or not out.json):
        _write(v.derivation, a.emit_derivation, out)
    return EXIT[v.verdict]


def cmd_cutelim(a, out: _Out) -> int:
    d = kernel.load(a.derivation)
    log: list = []
    r = cutelim.eliminate_cuts(a.calculus, d, trace=log)
    if a.trace:
        out.say("\n".join(str(s) for s in log), steps=[[s.case, s.kappa, s.sigma] for s in log])
    out.say(f"cuts {kernel.cut_count(d)} -> {kernel.cut_count(r)}, {len(log)} steps",
            cuts_before=kernel.cut_count(d), cuts_after=kernel.cut_count(r),
            measure_decreasing=cutelim.measure_log_decreasing(log))
    _write(r, a.out, out)
    return 0


def cmd_project(a, out: _Out) -> int:
    if bool(a.sequent) == bool(a.derivation):
        raise ValueError("give exactly one of --sequent and --derivation")
    q = a.unit_var if a.mode == "pi_q" else None
    if a.sequent:
        s = translate.project(parse_sequent(_text_arg(a.sequent)), a.mode, q)
        out.say(render_sequent(s), sequent=render_sequent(s))
        return 0
    d = translate.project_derivation(kernel.load(a.derivation), a.mode, q)
    res = kernel.check(get_calculus("!malc*"), d)
    out.say(f"check in !malc*: {res!r}", ok=res.ok)
    _write(d, a.out, out)
    return 0 if res.ok else 1


def _translate(fn, a, out: _Out) -> int:
    d = kernel.load(a.derivation)
    r = fn(d, a.calculus, a.target)
    tgt = get_calculus(a.target) if a.target else None
    if tgt is not None:
        res = kernel.check(tgt, r)
        out.say(f"check in {tgt.name}: {res!r}", ok=res.ok)
    _write(r, a.out, out)
    return 0


def cmd_destoup(a, out: _Out) -> int:
    return _translate(translate.destoup_derivation, a, out)


def cmd_enstoup(a, out: _Out) -> int:
    return _translate(translate.enstoup_derivation, a, out)


def cmd_encode(a, out: _Out) -> int:
    g = encodings.load_grammar(a.grammar)
    code = 0
    if a.selftest:
        if a.scheme == "buszkowski":
            st = encodings.brule_equivalence_selftest(encodings.buszkowski_rules(g))
            out.say("selftest: " + ("ok" if st.ok else f"failed {st.failed}"), selftest=st.ok)
        else:
            st = encodings.internalization_selftest(encodings.grammar_internalization(g, a.scheme))
            out.say(f"selftest: {st!r}", selftest=st.ok)
        code = 0 if st.ok else 1
    if a.word is None:
        return code
    word = encodings.word_of(a.word)
    if a.emit_sequent:
        out.say(render_sequent(encodings.encoding_sequent(g, word, a.scheme)),
                sequent=render_sequent(encodings.encoding_sequent(g, word, a.scheme)))
    m = encodings.rewrite_search(g, word, max_steps=a.max_steps)
    if m.trace is None:
        out.say("no rewriting found" + ("" if m.member is None else " (not a member)"), member=m.member)
        return code or (1 if m.member is False else 2)
    out.say(" => ".join(" ".join(w) or "ε" for w in m.trace.words()), member=True,
            trace=[" ".join(w) for w in m.trace.words()])
    if a.emit_derivation or a.check:
        d = encodings.synthesize_sequent_derivation(g, word, a.scheme, trace=m.trace)
        c = (encodings.brules_derivation_calculus(g) if a.scheme == "buszkowski"
             else get_calculus(encodings.SCHEME_CALCULUS[a.scheme]))
        res = kernel.check(c, d)
        out.say(f"check in {c.name}: {res!r}", ok=res.ok)
        if a.emit_derivation:
            kernel.dump(d, a.emit_derivation)
            out.say(f"wrote {a.emit_derivation}", derivation_file=a.emit_derivation)
        code = code or (0 if res.ok else 1)
    return code


def cmd_parse(a, out: _Out) -> int:
    lex = grammar.load_lexicon(a.lexicon)
    if a.goal:
        lex = grammar.with_goal(lex, parse_formula(a.goal))
    b = _budget(a)
    if a.mode == "s":
        r = grammar.s_recognize(a.calculus, lex, a.phrase, b)
    else:
        r = grammar.t_recognize(a.calculus, lex, a.phrase, b, a.max_brackets, time_limit=a.total_time)
    out.say(r.verdict, verdict=r.verdict, tried=r.tried, elapsed=round(r.elapsed, 3))
    if r.bracketing is not None:
        out.say(f"bracketing: {r.bracketing}", bracketing=r.bracketing)
    if r.by_bound:
        out.say("by bound: " + ", ".join(f"{k}:{v}" for k, v in sorted(r.by_bound.items())),
                by_bound={str(k): v for k, v in r.by_bound.items()})
    if r.caps:
        out.say("caps: " + ", ".join(r.caps), caps=list(r.caps))
    if r.derivation is not None and (a.emit_derivation or a.show):
        _write(r.derivation, a.emit_derivation, out)
    return EXIT[r.verdict]


def _add_budget(p: argparse.ArgumentParser):
    p.add_argument("--max-depth", type=int, default=40)
    p.add_argument("--max-contractions", type=int, default=2)
    p.add_argument("--max-size", type=int, default=80, help="largest sequent, in formula nodes")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per search")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lambekbang", description=__doc__.splitlines()[0])
    ap.add_argument("--format", choices=("text", "json"), default="text")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify a derivation file")
    p.add_argument("--calculus", required=True)
    p.add_argument("--derivation", required=True)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("search", help="cut-free proof search")
    p.add_argument("--calculus", required=True)
    p.add_argument("--sequent", required=True, help="sequent text or @file")
    _add_budget(p)
    p.add_argument("--no-prune", action="store_true", help="disable ancestor pruning")
    p.add_argument("--emit-derivation", metavar="OUT")
    p.set_defaults(fn=cmd_search)

    p = sub.add_parser("cutelim", help="eliminate cuts")
    p.add_argument("--calculus", required=True)
    p.add_argument("--derivation", required=True)
    p.add_argument("--out")
    p.add_argument("--trace", action="store_true", help="print the (kappa, sigma) step log")
    p.set_defaults(fn=cmd_cutelim)

    p = sub.add_parser("project", help="pi / pi_q projection")
    p.add_argument("--mode", choices=("pi", "pi_q"), default="pi")
    p.add_argument("--unit-var", default="q")
    p.add_argument("--sequent")
    p.add_argument("--derivation")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_project)

    for name, fn, hint in (("destoup", cmd_destoup, "flatten stoups"),
                           ("enstoup", cmd_enstoup, "simulate in the primed stoup system")):
        p = sub.add_parser(name, help=hint)
        p.add_argument("--calculus", required=True, help="calculus of the input derivation")
        p.add_argument("--target", help="target calculus (default: the matching partner)")
        p.add_argument("--derivation", required=True)
        p.add_argument("--out")
        p.set_defaults(fn=fn)

    p = sub.add_parser("encode", help="semi-Thue encodings")
    p.add_argument("--grammar", required=True)
    p.add_argument("--scheme", required=True, choices=tuple(encodings.SCHEME_CALCULUS))
    p.add_argument("--word")
    p.add_argument("--emit-sequent", action="store_true")
    p.add_argument("--emit-derivation", metavar="OUT")
    p.add_argument("--check", action="store_true", help="synthesize and check without writing")
    p.add_argument("--selftest", action="store_true")
    p.add_argument("--max-steps", type=int, default=200_000, help="rewriting search bound")
    p.set_defaults(fn=cmd_encode)

    p = sub.add_parser("parse", help="categorial-grammar recognition")
    p.add_argument("--calculus", required=True)
    p.add_argument("--lexicon", required=True, help="lexicon file or bundled name: " + ", ".join(grammar.LEXICON_NAMES))
    p.add_argument("--mode", choices=("s", "t"), default="s")
    p.add_argument("--max-brackets", type=int, default=2)
    p.add_argument("--phrase", required=True)
    p.add_argument("--goal", help="override the lexicon goal")
    _add_budget(p)
    p.add_argument("--total-time", type=float, default=None, help="seconds for the whole bracketing sweep")
    p.add_argument("--emit-derivation", metavar="OUT")
    p.add_argument("--show", action="store_true", help="print the derivation")
    p.set_defaults(fn=cmd_parse)
    return ap


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    out = _Out(a.format)
    try:
        code = a.fn(a, out)
    except (ValueError, KeyError, OSError, json.JSONDecodeError, RuntimeError) as e:
        out.record["error"] = f"{type(e).__name__}: {e}"
        if not out.json:
            print(f"error: {e}", file=sys.stderr)
        return out.done(BAD_INPUT)
    return out.done(code)


if __name__ == "__main__":
    sys.exit(main())
