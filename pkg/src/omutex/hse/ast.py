"""AST for the guarded-command (handshaking-expansion) subset.

Guards are boolean trees over named nodes; statements cover dataless
assignment, waits, sequencing, parallel groups, deterministic and
non-deterministic selection, and unguarded repetition.  All types are
frozen dataclasses: structural equality doubles as the round-trip
test's notion of sameness and makes guards usable as dict keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple


class Guard:
    """Base class for guard expressions."""

    __slots__ = ()

    def nodes(self):
        out = set()
        _guard_nodes(self, out)
        return out


@dataclass(frozen=True)
class Ref(Guard):
    name: str


@dataclass(frozen=True)
class Not(Guard):
    operand: Guard


@dataclass(frozen=True)
class And(Guard):
    left: Guard
    right: Guard


@dataclass(frozen=True)
class Or(Guard):
    left: Guard
    right: Guard


def _guard_nodes(g, out):
    if isinstance(g, Ref):
        out.add(g.name)
    elif isinstance(g, Not):
        _guard_nodes(g.operand, out)
    else:
        _guard_nodes(g.left, out)
        _guard_nodes(g.right, out)


def conj(*terms: Guard) -> Guard:
    """Left-nested conjunction of one or more terms."""
    acc = terms[0]
    for t in terms[1:]:
        acc = And(acc, t)
    return acc


def disj(*terms: Guard) -> Guard:
    acc = terms[0]
    for t in terms[1:]:
        acc = Or(acc, t)
    return acc


class Statement:
    __slots__ = ()


@dataclass(frozen=True)
class Skip(Statement):
    pass


@dataclass(frozen=True)
class Assign(Statement):
    node: str
    up: bool


@dataclass(frozen=True)
class Wait(Statement):
    guard: Guard


@dataclass(frozen=True)
class Seq(Statement):
    items: Tuple[Statement, ...]


@dataclass(frozen=True)
class Par(Statement):
    items: Tuple[Statement, ...]


@dataclass(frozen=True)
class DetSel(Statement):
    """Deterministic selection: guards must be stable and mutually
    exclusive; two true guards at commit time are a stability error."""

    branches: Tuple[Tuple[Guard, Statement], ...]


@dataclass(frozen=True)
class NondetSel(Statement):
    """Arbitrated selection: under contention one true branch is picked
    by the decision source (an arbiter, in the circuit reading)."""

    branches: Tuple[Tuple[Guard, Statement], ...]


@dataclass(frozen=True)
class Loop(Statement):
    """Unguarded repetition *[body]: repeats forever."""

    body: Statement


@dataclass(frozen=True)
class ProcessSet:
    """Top-level parallel composition plus initial node values.

    Nodes not named in `initial` start false.
    """

    processes: Tuple[Statement, ...]
    initial: Tuple[Tuple[str, int], ...] = ()

    def initial_map(self) -> dict:
        return dict(self.initial)

    def nodes(self):
        out = set(name for (name, _) in self.initial)
        for p in self.processes:
            _stmt_nodes(p, out)
        return out


def _stmt_nodes(s, out):
    if isinstance(s, Assign):
        out.add(s.node)
    elif isinstance(s, Wait):
        out |= s.guard.nodes()
    elif isinstance(s, (Seq, Par)):
        for it in s.items:
            _stmt_nodes(it, out)
    elif isinstance(s, (DetSel, NondetSel)):
        for (g, b) in s.branches:
            out |= g.nodes()
            _stmt_nodes(b, out)
    elif isinstance(s, Loop):
        _stmt_nodes(s.body, out)


# ---------------------------------------------------------------------------
# Pretty printer.  format_process_set(parse_hse(text)) reparses to an
# equal AST; the printer is also how guards are shown in error messages.

def format_guard(g: Guard, _prec=0) -> str:
    # precedence: or=1, and=2, not=3
    if isinstance(g, Ref):
        return g.name
    if isinstance(g, Not):
        s = "~" + format_guard(g.operand, 3)
        return s
    if isinstance(g, And):
        s = format_guard(g.left, 2) + " & " + format_guard(g.right, 2)
        return "(" + s + ")" if _prec > 2 else s
    if isinstance(g, Or):
        s = format_guard(g.left, 1) + " | " + format_guard(g.right, 1)
        return "(" + s + ")" if _prec > 1 else s
    raise TypeError("not a guard: %r" % (g,))


def format_statement(s: Statement, indent=0) -> str:
    pad = "  " * indent
    if isinstance(s, Skip):
        return pad + "skip"
    if isinstance(s, Assign):
        return pad + s.node + ("+" if s.up else "-")
    if isinstance(s, Wait):
        return pad + "[" + format_guard(s.guard) + "]"
    if isinstance(s, Seq):
        return (";\n").join(format_statement(it, indent) for it in s.items)
    if isinstance(s, Par):
        inner = (" ||\n").join(
            format_statement(it, indent + 1) for it in s.items)
        return pad + "(\n" + inner + "\n" + pad + ")"
    if isinstance(s, (DetSel, NondetSel)):
        op, cl = ("[|", "|]") if isinstance(s, NondetSel) else ("[", "]")
        parts = []
        for i, (g, b) in enumerate(s.branches):
            lead = pad + (" " if i == 0 else "[] ")
            parts.append(lead + format_guard(g) + " ->\n"
                         + format_statement(b, indent + 2))
        return pad + op + "\n" + "\n".join(parts) + "\n" + pad + cl
    if isinstance(s, Loop):
        return (pad + "*[\n" + format_statement(s.body, indent + 1)
                + "\n" + pad + "]")
    raise TypeError("not a statement: %r" % (s,))


def format_process_set(ps: ProcessSet) -> str:
    lines = ["%s=%d;" % (name, val) for (name, val) in ps.initial]
    body = ("\n||\n").join(format_statement(p, 0) for p in ps.processes)
    if lines:
        return "\n".join(lines) + "\n" + body + "\n"
    return body + "\n"
