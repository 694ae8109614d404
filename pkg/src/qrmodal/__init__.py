"""Labelled natural deduction for quantum register modalities.

Five parts: syntax (formulas, parsing, printing), kernel (trusted proof
checker plus derived-rule expansion), semantics (finite frames, models,
truth), search (frame enumeration and countermodel search), cli.
"""

from .syntax import (
    BOT, Bottom, Box, Formula, Implies, Labelled, MFormula, ParseError,
    Prop, Rel, Relational, System, conj, diamond, disj, iff, labels_in,
    legal_rels, neg, parse_formula, parse_mformula, print_formula,
    print_mformula, props_in, substitute,
)
from .kernel import (
    CheckReport, Diagnostic, KernelError, ProofScript, ProofStep, check,
    expand_derived, open_assumptions, parse_script, print_script,
)
from .semantics import (
    Frame, FrameViolation, InvalidFrame, Model, SemanticsError, Structure,
    UnboundLabel, UnknownWorld, WrongSystem, entails_in, evaluate, holds,
    parse_structure, print_structure, validate_frame,
)
from .search import (
    BoundTooLarge, CountermodelResult, Found, NotFoundWithin, SearchBudget,
    enumerate_frames, find_countermodel, random_valid_frame,
)

__version__ = "0.1.0"
