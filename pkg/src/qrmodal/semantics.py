"""Finite frames and models, frame validation, and truth evaluation.

A frame has worlds 0..size-1, an equivalence relation U and a
measurement relation Meas (read as M under MSQR, as P under MSpQR).
validate_frame checks the frame conditions of the requested system and
returns one violation per witness instead of a bare verdict:

  MSQR:  U equivalence, Meas subset of U, Meas serial, Meas
         shift-reflexive (v M w implies w M w), and classical worlds
         measure only themselves (v M v and v M w imply v = w).
  MSpQR: U equivalence, Meas subset of U, Meas transitive, every world
         reaches a classical world (some w with v P w and w P w), and
         the classical-uniqueness condition as in MSQR.

Truth is classical: bot is false, -> is material, a box quantifies over
the successors of the evaluation world along its relation.

Model files look like:

    system MSQR
    worlds v w
    U v v
    U v w
    U w v
    U w w
    M v w
    M w w
    val w: r0
    interp x = v

One relation pair per line, `val` lines list the propositions true at a
world (worlds with no line get none), `interp` binds labels to worlds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .syntax import (
    BOT, Bottom, Box, Formula, Implies, Labelled, MFormula, ParseError, Prop,
    Rel, Relational, System, legal_rels, print_mformula, rels_in,
    rels_in_formula,
)


class SemanticsError(Exception):
    code = "semantics"


class UnknownWorld(SemanticsError):
    code = "unknown-world"


class UnboundLabel(SemanticsError):
    code = "unbound-label"


class WrongSystem(SemanticsError):
    code = "wrong-system"


class InvalidFrame(SemanticsError):
    """Raised by the loader when a frame fails validation."""

    code = "invalid-frame"

    def __init__(self, violations):
        super().__init__("; ".join(str(v) for v in violations))
        self.violations = violations


Pair = tuple[int, int]


class Frame:
    """Immutable frame; worlds are 0..size-1 with display names."""

    def __init__(self, system: System, size: int, u: Iterable[Pair],
                 meas: Iterable[Pair], names: Optional[Sequence[str]] = None):
        if size < 1:
            raise ValueError("a frame needs at least one world")
        self.system = system
        self.size = size
        self.u = frozenset(u)
        self.meas = frozenset(meas)
        for (v, w) in self.u | self.meas:
            if not (0 <= v < size and 0 <= w < size):
                raise ValueError("relation pair (%d, %d) out of range" % (v, w))
        if names is None:
            names = tuple("w%d" % i for i in range(size))
        else:
            names = tuple(names)
            if len(names) != size or len(set(names)) != size:
                raise ValueError("need %d distinct world names" % size)
        self.names = names
        meas_rel = Rel.M if system is System.MSQR else Rel.P
        self.succ = {
            Rel.U: _rows(size, self.u),
            meas_rel: _rows(size, self.meas),
        }

    def pairs(self, rel: Rel) -> frozenset[Pair]:
        if rel is Rel.U:
            return self.u
        if rel not in legal_rels(self.system):
            raise WrongSystem("relation %s is not part of %s"
                              % (rel.value, self.system.value))
        return self.meas

    def classical(self, w: int) -> bool:
        return (w, w) in self.meas

    def key(self):
        return (self.size, tuple(sorted(self.u)), tuple(sorted(self.meas)))

    def __eq__(self, other):
        return (isinstance(other, Frame) and self.system == other.system
                and self.size == other.size and self.u == other.u
                and self.meas == other.meas)

    def __hash__(self):
        return hash((self.system, self.size, self.u, self.meas))

    def __repr__(self):
        return "Frame(%s, %d, u=%s, meas=%s)" % (
            self.system.value, self.size, sorted(self.u), sorted(self.meas))


def _rows(size: int, pairs: frozenset[Pair]) -> tuple[tuple[int, ...], ...]:
    return tuple(tuple(w for w in range(size) if (v, w) in pairs)
                 for v in range(size))


@dataclass(frozen=True)
class FrameViolation:
    prop: str  # stable property name
    witnesses: tuple[int, ...]

    def __str__(self):
        return "%s at (%s)" % (self.prop, ", ".join(map(str, self.witnesses)))


def describe_violation(frame: Frame, v: FrameViolation) -> str:
    return "%s at (%s)" % (v.prop, ", ".join(frame.names[w] for w in v.witnesses))


def validate_frame(frame: Frame, disabled: Iterable[str] = ()) -> list[FrameViolation]:
    """All violated frame conditions, one entry per witness.

    disabled names properties to skip, using the violation names
    (not-equivalence, meas-not-sub-U, not-serial, not-shift-reflexive,
    classical-not-unique, not-transitive, no-classical-reachable).
    """
    skip = frozenset(disabled)
    out: list[FrameViolation] = []
    rng = range(frame.size)
    u, meas = frame.u, frame.meas

    if "not-equivalence" not in skip:
        for w in rng:
            if (w, w) not in u:
                out.append(FrameViolation("not-equivalence", (w,)))
        for (v, w) in sorted(u):
            if (w, v) not in u:
                out.append(FrameViolation("not-equivalence", (v, w)))
        for (v, w) in sorted(u):
            for z in rng:
                if (w, z) in u and (v, z) not in u:
                    out.append(FrameViolation("not-equivalence", (v, w, z)))
    if "meas-not-sub-U" not in skip:
        for (v, w) in sorted(meas):
            if (v, w) not in u:
                out.append(FrameViolation("meas-not-sub-U", (v, w)))
    if frame.system is System.MSQR:
        if "not-serial" not in skip:
            for v in rng:
                if not any((v, w) in meas for w in rng):
                    out.append(FrameViolation("not-serial", (v,)))
        if "not-shift-reflexive" not in skip:
            for (v, w) in sorted(meas):
                if (w, w) not in meas:
                    out.append(FrameViolation("not-shift-reflexive", (v, w)))
    else:
        if "not-transitive" not in skip:
            for (v, w) in sorted(meas):
                for z in rng:
                    if (w, z) in meas and (v, z) not in meas:
                        out.append(FrameViolation("not-transitive", (v, w, z)))
        if "no-classical-reachable" not in skip:
            for v in rng:
                if not any((v, w) in meas and (w, w) in meas for w in rng):
                    out.append(FrameViolation("no-classical-reachable", (v,)))
    if "classical-not-unique" not in skip:
        for v in rng:
            if (v, v) in meas:
                for w in rng:
                    if w != v and (v, w) in meas:
                        out.append(FrameViolation("classical-not-unique", (v, w)))
    return out


class Model:
    """A frame plus a valuation (set of true propositions per world)."""

    def __init__(self, frame: Frame, valuation: Mapping[int, Iterable[str]]):
        self.frame = frame
        val = [frozenset()] * frame.size
        for w, props in valuation.items():
            if not (0 <= w < frame.size):
                raise UnknownWorld("world %r out of range" % (w,))
            val[w] = frozenset(props)
        self.valuation = tuple(val)

    def __eq__(self, other):
        return (isinstance(other, Model) and self.frame == other.frame
                and self.valuation == other.valuation)

    def __hash__(self):
        return hash((self.frame, self.valuation))

    def __repr__(self):
        return "Model(%r, %s)" % (self.frame,
                                  [sorted(s) for s in self.valuation])


class Structure:
    """A model plus an interpretation of labels as worlds."""

    def __init__(self, model: Model, interp: Mapping[str, int]):
        self.model = model
        for lab, w in interp.items():
            if not (0 <= w < model.frame.size):
                raise UnknownWorld("label %s bound to world %r out of range"
                                   % (lab, w))
        self.interp = dict(interp)

    def __eq__(self, other):
        return (isinstance(other, Structure) and self.model == other.model
                and self.interp == other.interp)

    def __repr__(self):
        return "Structure(%r, %r)" % (self.model, self.interp)


def evaluate(model: Model, world: int, phi: MFormula) -> bool:
    """Truth of an m-formula at a world of a model."""
    if not (0 <= world < model.frame.size):
        raise UnknownWorld("world %r out of range" % (world,))
    bad = rels_in(phi) - legal_rels(model.frame.system)
    if bad:
        raise WrongSystem("relation %s is not part of %s"
                          % (sorted(bad)[0].value, model.frame.system.value))
    return _ev(model, world, phi)


def _ev(model: Model, world: int, phi: MFormula) -> bool:
    if isinstance(phi, Prop):
        return phi.name in model.valuation[world]
    if isinstance(phi, Implies):
        return not _ev(model, world, phi.left) or _ev(model, world, phi.right)
    if isinstance(phi, Box):
        rows = model.frame.succ[phi.rel]
        return all(_ev(model, w, phi.body) for w in rows[world])
    return False  # Bottom


def holds(structure: Structure, f: Formula) -> bool:
    """Truth of a labelled or relational formula under an interpretation."""
    model = structure.model
    if isinstance(f, Labelled):
        if f.label not in structure.interp:
            raise UnboundLabel("label %s is not interpreted" % f.label)
        return evaluate(model, structure.interp[f.label], f.body)
    assert isinstance(f, Relational)
    pairs = model.frame.pairs(f.rel)
    for lab in (f.left, f.right):
        if lab not in structure.interp:
            raise UnboundLabel("label %s is not interpreted" % lab)
    return (structure.interp[f.left], structure.interp[f.right]) in pairs


def entails_in(structure: Structure, gamma: Iterable[Formula],
               alpha: Formula) -> bool:
    """True unless every formula of gamma holds while alpha fails."""
    gamma = list(gamma)
    for g in gamma:  # surface unbound labels even when gamma fails early
        for lab in sorted(_labels(g)):
            if lab not in structure.interp:
                raise UnboundLabel("label %s is not interpreted" % lab)
    if all(holds(structure, g) for g in gamma):
        return holds(structure, alpha)
    return True


def _labels(f: Formula) -> frozenset[str]:
    if isinstance(f, Labelled):
        return frozenset((f.label,))
    return frozenset((f.left, f.right))


# ---------------------------------------------------------------------------
# model files

def parse_structure(text: str, allow_invalid: bool = False) -> Structure:
    """Load a structure from the model file format.

    The frame is validated; violations raise InvalidFrame unless
    allow_invalid is set.
    """
    system: Optional[System] = None
    names: Optional[list[str]] = None
    index: dict[str, int] = {}
    u: set[Pair] = set()
    meas: set[Pair] = set()
    val: dict[int, set[str]] = {}
    val_seen: set[int] = set()
    interp: dict[str, int] = {}

    def err(lineno: int, msg: str, reason: str = "syntax") -> ParseError:
        return ParseError(msg, lineno, 1, reason=reason)

    def world(lineno: int, name: str) -> int:
        if names is None:
            raise err(lineno, "worlds must be declared first")
        if name not in index:
            raise err(lineno, "unknown world %r" % name)
        return index[name]

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        head = fields[0]
        if head == "system":
            if system is not None:
                raise err(lineno, "duplicate system line")
            if len(fields) != 2 or fields[1] not in ("MSQR", "MSPQR"):
                raise err(lineno, "expected 'system MSQR' or 'system MSPQR'")
            system = System(fields[1])
        elif head == "worlds":
            if system is None:
                raise err(lineno, "system must be declared first")
            if names is not None:
                raise err(lineno, "duplicate worlds line")
            if len(fields) < 2:
                raise err(lineno, "at least one world is required")
            names = fields[1:]
            if len(set(names)) != len(names):
                raise err(lineno, "duplicate world name")
            index = {n: i for i, n in enumerate(names)}
        elif head in ("U", "M", "P"):
            if system is None:
                raise err(lineno, "system must be declared first")
            if head != "U" and Rel(head) not in legal_rels(system):
                raise err(lineno, "relation %s is not part of %s"
                          % (head, system.value), reason="wrong-system")
            if len(fields) != 3:
                raise err(lineno, "expected '%s <world> <world>'" % head)
            pair = (world(lineno, fields[1]), world(lineno, fields[2]))
            (u if head == "U" else meas).add(pair)
        elif head == "val":
            if len(fields) < 2 or not fields[1].endswith(":"):
                raise err(lineno, "expected 'val <world>: <props>'")
            w = world(lineno, fields[1][:-1])
            if w in val_seen:
                raise err(lineno, "duplicate val line for %r" % fields[1][:-1])
            val_seen.add(w)
            val[w] = set(fields[2:])
        elif head == "interp":
            if len(fields) != 4 or fields[2] != "=":
                raise err(lineno, "expected 'interp <label> = <world>'")
            if fields[1] in interp:
                raise err(lineno, "duplicate interp for label %r" % fields[1])
            interp[fields[1]] = world(lineno, fields[3])
        else:
            raise err(lineno, "unrecognized line %r" % head)

    if system is None:
        raise ParseError("missing system line", 1, 1)
    if names is None:
        raise ParseError("missing worlds line", 1, 1)
    frame = Frame(system, len(names), u, meas, names)
    violations = validate_frame(frame)
    if violations and not allow_invalid:
        raise InvalidFrame(violations)
    return Structure(Model(frame, val), interp)


def print_structure(structure: Structure) -> str:
    """Canonical model file text; parse_structure inverts it."""
    model = structure.model
    frame = model.frame
    meas_sym = "M" if frame.system is System.MSQR else "P"
    lines = ["system " + frame.system.value,
             "worlds " + " ".join(frame.names)]
    for (v, w) in sorted(frame.u):
        lines.append("U %s %s" % (frame.names[v], frame.names[w]))
    for (v, w) in sorted(frame.meas):
        lines.append("%s %s %s" % (meas_sym, frame.names[v], frame.names[w]))
    for w in range(frame.size):
        if model.valuation[w]:
            lines.append("val %s: %s" % (frame.names[w],
                                         " ".join(sorted(model.valuation[w]))))
    for lab in sorted(structure.interp):
        lines.append("interp %s = %s" % (lab, frame.names[structure.interp[lab]]))
    return "\n".join(lines) + "\n"
