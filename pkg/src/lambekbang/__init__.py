"""Lambek calculus with subexponential and bracket modalities: checking,
search, cut elimination, translations, encodings and grammar recognition."""

from .calculi import Calculus, RuleApp, get_calculus
from .kernel import Derivation, check, cut_count
from .search import Derivable, SearchBudget, Underivable, Unknown, is_derivable
from .syntax import Formula, MetaFormula, Sequent, parse_formula, parse_sequent, render

__all__ = [
    "Calculus", "RuleApp", "get_calculus",
    "Derivation", "check", "cut_count",
    "Derivable", "SearchBudget", "Underivable", "Unknown", "is_derivable",
    "Formula", "MetaFormula", "Sequent", "parse_formula", "parse_sequent", "render",
]
