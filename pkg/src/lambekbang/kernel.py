"""Derivation trees, forward checking and the JSON interchange format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .calculi import Calculus, RuleApp, RuleError, premises_of
from .syntax import (
    Sequent,
    lambek_restriction_holds,
    parse_sequent,
    render_sequent,
    sequent_formulas,
    subformula_closure,
)


@dataclass(frozen=True)
class Derivation:
    sequent: Sequent
    rule: RuleApp
    children: tuple["Derivation", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def nodes(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], "Derivation"]]:
        """Pre-order walk yielding (child-index path, node)."""
        yield path, self
        for i, ch in enumerate(self.children):
            yield from ch.nodes(path + (i,))

    def size(self) -> int:
        return 1 + sum(ch.size() for ch in self.children)

    def height(self) -> int:
        return 1 + max((ch.height() for ch in self.children), default=0)

    def rules_used(self) -> set[str]:
        return {n.rule.rule for _, n in self.nodes()}

    def __str__(self) -> str:
        return "\n".join(pretty_lines(self))


def node(sequent, rule: str | RuleApp, *children: Derivation, **params) -> Derivation:
    """Build a node; ``sequent`` may be text and ``rule`` a bare name."""
    s = parse_sequent(sequent) if isinstance(sequent, str) else sequent
    app = rule if isinstance(rule, RuleApp) else RuleApp(rule, **params)
    return Derivation(s, app, tuple(children))


@dataclass(frozen=True)
class CheckError:
    path: tuple[int, ...]
    reason: str

    def __str__(self) -> str:
        return f"at node {list(self.path)}: {self.reason}"


class CheckResult:
    """``ok`` or the first failing node."""

    def __init__(self, error: CheckError | None = None):
        self.error = error

    @property
    def ok(self) -> bool:
        return self.error is None

    def __bool__(self) -> bool:
        return self.ok

    def __repr__(self) -> str:
        return "ok" if self.ok else f"error({self.error})"


def check(c: Calculus, d: Derivation, assumptions=()) -> CheckResult:
    """Verify every node of ``d`` against the rules of ``c``.

    Leaves with rule ``hyp`` are accepted when their sequent is one of
    ``assumptions``; this checks derivations from hypotheses.
    """
    allowed = set(assumptions)
    for path, n in d.nodes():
        if n.rule.rule == "hyp":
            if n.children or n.sequent not in allowed:
                return CheckResult(CheckError(path, f"hyp: {n.sequent} is not an assumption"))
            continue
        if c.features.lambek_restricted and not lambek_restriction_holds(n.sequent):
            return CheckResult(CheckError(path, f"Lambek restriction fails for {n.sequent}"))
        try:
            prem = premises_of(c, n.sequent, n.rule)
        except RuleError as e:
            return CheckResult(CheckError(path, f"{n.rule.rule}: {type(e).__name__}: {e}"))
        got = [ch.sequent for ch in n.children]
        if len(prem) != len(got):
            return CheckResult(CheckError(
                path, f"{n.rule.rule}: expected {len(prem)} premises, found {len(got)}"))
        for k, (want, have) in enumerate(zip(prem, got)):
            if want != have:
                return CheckResult(CheckError(
                    path, f"{n.rule.rule}: premise {k} should be {want}, found {have}"))
    return CheckResult()


def cut_count(d: Derivation) -> int:
    return sum(1 for _, n in d.nodes() if n.rule.rule == "cut")


class PreconditionError(ValueError):
    pass


@dataclass(frozen=True)
class Violation:
    path: tuple[int, ...]
    formula: object

    def __str__(self) -> str:
        return f"at node {list(self.path)}: {self.formula} is not a subformula of the end-sequent"


def assert_subformula_property(d: Derivation) -> Violation | None:
    """None when every formula of every node is a subformula of the root."""
    if any(n.rule.rule in ("cut", "B", "B'") for _, n in d.nodes()):
        raise PreconditionError("subformula property is only claimed for cut-free, B-rule-free derivations")
    closure = subformula_closure(d.sequent)
    for path, n in d.nodes():
        for f in sequent_formulas(n.sequent):
            if f not in closure:
                return Violation(path, f)
    return None


# ---------------------------------------------------------------------------
# JSON


def to_json(d: Derivation) -> dict:
    out = {"rule": d.rule.rule, "params": d.rule.to_json(), "sequent": render_sequent(d.sequent)}
    out["premises"] = [to_json(ch) for ch in d.children]
    return out


def from_json(obj: dict) -> Derivation:
    app = RuleApp.from_json(obj["rule"], obj.get("params"))
    kids = tuple(from_json(ch) for ch in obj.get("premises", ()))
    return Derivation(parse_sequent(obj["sequent"]), app, kids)


def dump(d: Derivation, path: str | Path | None = None, **meta) -> str:
    obj = to_json(d)
    if meta:
        obj = {**meta, **obj}
    text = json.dumps(obj, indent=1, ensure_ascii=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load(path: str | Path) -> Derivation:
    return from_json(json.loads(Path(path).read_text()))


def load_with_meta(path: str | Path) -> tuple[Derivation, dict]:
    obj = json.loads(Path(path).read_text())
    meta = {k: v for k, v in obj.items() if k not in ("rule", "params", "sequent", "premises")}
    return from_json(obj), meta


def pretty_lines(d: Derivation, indent: str = "") -> list[str]:
    params = d.rule.to_json()
    extra = (" " + json.dumps(params)) if params else ""
    lines = [f"{indent}{render_sequent(d.sequent)}   [{d.rule.rule}{extra}]"]
    for ch in d.children:
        lines.extend(pretty_lines(ch, indent + "  "))
    return lines
