"""Server variants for two-client mutual exclusion over handshake channels.

The opportunistic servers watch an early-release wire from the current
user and may acknowledge the waiting client before the actual release,
when the configured timing bounds make that safe (see omutex.timing).

Eight builds exist.  Public: baseline, the three-arbiter form, the
single-arbiter form, the symmetric form, and a deliberately unsafe
naive form that grants on the early release regardless of request
order (a negative-test oracle).  Hidden: the two intermediate rewrites
between the three-arbiter and single-arbiter forms, and the symmetric
single-arbiter decomposition; they exist so the rewrite chain can be
checked for trace equivalence step by step.

Channel shapes: C1 is always an early/actual client (wires C1.r_e,
C1.r_a, C1.a).  C2 is a simple client (C2.r, C2.a) in the asymmetric
family and early/actual in the symmetric family.

Transcription notes, recorded where they bite:
- the three-arbiter form's first guard carries a `~x` conjunct: without
  it the first selection can grant C1 while x is still set, leaving
  both acknowledges high and the following two-way selection blocked
  forever, and the rewrite chain stops being equivalent;
- the symmetric six-way form's second guard uses `~g2` (not `~g1`):
  every other guard swaps the 1/2 suffixes consistently, and `~g1`
  there would both block C2's opportunistic grant exactly during the
  overlap window and let a fresh C2 grant collide with C2's pending
  completion;
- the single-arbiter forms check, at every selection commit, that the
  completion flag g is low whenever the mode flag f is high; that fact
  is what justifies strengthening the arbiter guard with `~g`, and the
  interpreter asserts it as a commit invariant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Dict, Tuple

from omutex.clients import ChannelSpec
from omutex.hse import ast
from omutex.hse.parser import parse_guard, parse_hse


class ServerVariant(enum.Enum):
    BASELINE = "baseline"
    ASYM_THREE_ARBITER = "asym3"
    ASYM_TWO_PROCESS = "asym2"          # hidden rewrite step
    ASYM_FOUR_WAY = "asym4"             # hidden rewrite step
    ASYM_SINGLE_ARBITER = "asym1"
    SYMMETRIC = "symmetric"
    SYMMETRIC_SINGLE_ARBITER = "sym1"   # hidden decomposition
    NAIVE_EARLY_GRANT = "naive"


PUBLIC_VARIANTS = (
    ServerVariant.BASELINE,
    ServerVariant.ASYM_THREE_ARBITER,
    ServerVariant.ASYM_SINGLE_ARBITER,
    ServerVariant.SYMMETRIC,
    ServerVariant.NAIVE_EARLY_GRANT,
)

_ALIASES = {
    "baseline": ServerVariant.BASELINE,
    "asym3": ServerVariant.ASYM_THREE_ARBITER,
    "asym2": ServerVariant.ASYM_TWO_PROCESS,
    "asym4": ServerVariant.ASYM_FOUR_WAY,
    "asym1": ServerVariant.ASYM_SINGLE_ARBITER,
    "symmetric": ServerVariant.SYMMETRIC,
    "sym6": ServerVariant.SYMMETRIC,
    "sym1": ServerVariant.SYMMETRIC_SINGLE_ARBITER,
    "naive": ServerVariant.NAIVE_EARLY_GRANT,
}


def variant_by_name(name: str) -> ServerVariant:
    key = name.strip().lower()
    if key not in _ALIASES:
        raise ValueError("unknown server variant %r (choose from %s)"
                         % (name, ", ".join(sorted(_ALIASES))))
    return _ALIASES[key]


# ---------------------------------------------------------------------------
# Program texts

BASELINE_ASYM_TEXT = """\
*[
  [| C1.r_e & C1.r_a -> C1.a+; [~C1.r_a]; C1.a-
  []          C2.r -> C2.a+; [~C2.r]; C2.a-
  |]
]
"""

BASELINE_SYM_TEXT = """\
*[
  [| C1.r_e & C1.r_a -> C1.a+; [~C1.r_a]; C1.a-
  [] C2.r_e & C2.r_a -> C2.a+; [~C2.r_a]; C2.a-
  |]
]
"""

ASYM_THREE_ARBITER_TEXT = """\
x=0;
*[
  [| C1.r_e & C1.r_a & ~x -> C1.a+
  []            x | C2.r -> C2.a+
  |];
  [ ~C2.a -> [| ~C1.r_e -> [| ~C1.r_a -> C1.a-
                            []   C2.r -> C2.a+; x+; [~C1.r_a]; C1.a-
                            |]
              []   C2.r -> [~C1.r_a]; C1.a-
              |]
  [] ~C1.a -> [~C2.r]; C2.a-; x-
  ]
]
"""

ASYM_TWO_PROCESS_TEXT = """\
g=0;
*[ [g & ~C1.r_a & ~C1.r_e]; C1.a-; g- ]
||
*[
  [| ~g & C1.r_e -> [C1.r_a]; C1.a+;
       [|    C2.r -> g+; [~g]
       [] ~C1.r_e -> g+
       |]
  []       C2.r -> C2.a+; [~g & ~C2.r]; C2.a-
  |]
]
"""

ASYM_FOUR_WAY_TEXT = """\
g=0;
f=0;
*[ [g & ~C1.r_a & ~C1.r_e]; C1.a-; g- ]
||
*[
  [| ~f & ~g & C1.r_e -> [C1.r_a]; C1.a+; f+
  []        ~f & C2.r -> C2.a+; [~g & ~C2.r]; C2.a-
  []         f & C2.r -> g+; [~g]; f-
  []     f & ~C1.r_e -> g+; f-
  |]
]
"""

# The arbiter's first guard is ~g & (f xor C1.r_e), written out over
# and/or/not since guards carry no xor operator.
ASYM_SINGLE_ARBITER_TEXT = """\
g=0;
f=0;
*[ [g & ~C1.r_a & ~C1.r_e]; C1.a-; g- ]
||
*[
  [| ~g & ((f & ~C1.r_e) | (~f & C1.r_e)) ->
       v+; [~(~g & ((f & ~C1.r_e) | (~f & C1.r_e)))]; v-
  [] C2.r -> u+; [~C2.r]; u-
  |]
]
||
*[
  [ ~f & v -> [C1.r_a]; C1.a+; f+
  [] ~f & u -> C2.a+; [~g & ~C2.r]; C2.a-
  []  f & u -> g+; [~g]; f-
  []  f & v -> g+; f-
  ]
]
"""

SYMMETRIC_TEXT = """\
g1=0;
g2=0;
f1=0;
f2=0;
*[ [g1 & ~C1.r_a & ~C1.r_e]; C1.a-; g1- ]
||
*[ [g2 & ~C2.r_a & ~C2.r_e]; C2.a-; g2- ]
||
*[
  [| ~f1 & ~f2 & ~g1 & C1.r_e -> [C1.r_a]; C1.a+; f1+
  [] ~f1 & ~f2 & ~g2 & C2.r_e -> [C2.r_a]; C2.a+; f2+
  [] f1 & ~f2 & ~g2 & C2.r_a & C2.r_e -> g1+; [~g1]; f1-
  [] f1 & ~f2 & ~C1.r_e -> g1+; f1-
  [] ~f1 & f2 & ~g1 & C1.r_a & C1.r_e -> g2+; [~g2]; f2-
  [] ~f1 & f2 & ~C2.r_e -> g2+; f2-
  |]
]
"""

# Symmetric decomposition to one arbiter operating in three modes
# (idle, f1, f2), built on the same pattern as the asymmetric one: each
# arbiter guard multiplexes that side's three six-way guards; the ~g1 /
# ~g2 conjuncts are the same strengthening as the asymmetric case and
# are covered by the same commit invariant.
SYMMETRIC_SINGLE_ARBITER_TEXT = """\
g1=0;
g2=0;
f1=0;
f2=0;
*[ [g1 & ~C1.r_a & ~C1.r_e]; C1.a-; g1- ]
||
*[ [g2 & ~C2.r_a & ~C2.r_e]; C2.a-; g2- ]
||
*[
  [| ~g1 & ((~f1 & ~f2 & C1.r_e) | (f1 & ~f2 & ~C1.r_e) | (~f1 & f2 & C1.r_a & C1.r_e)) ->
       v1+;
       [~(~g1 & ((~f1 & ~f2 & C1.r_e) | (f1 & ~f2 & ~C1.r_e) | (~f1 & f2 & C1.r_a & C1.r_e)))];
       v1-
  [] ~g2 & ((~f1 & ~f2 & C2.r_e) | (f1 & ~f2 & C2.r_a & C2.r_e) | (~f1 & f2 & ~C2.r_e)) ->
       v2+;
       [~(~g2 & ((~f1 & ~f2 & C2.r_e) | (f1 & ~f2 & C2.r_a & C2.r_e) | (~f1 & f2 & ~C2.r_e)))];
       v2-
  |]
]
||
*[
  [ ~f1 & ~f2 & v1 -> [C1.r_a]; C1.a+; f1+
  [] ~f1 & ~f2 & v2 -> [C2.r_a]; C2.a+; f2+
  [] f1 & v2 -> g1+; [~g1]; f1-
  [] f1 & v1 -> g1+; f1-
  [] f2 & v1 -> g2+; [~g2]; f2-
  [] f2 & v2 -> g2+; f2-
  ]
]
"""

# Negative-test server: after granting C1 it waits for the early
# release unconditionally, then grants any pending C2 request -- even
# one that arrived before the early release, which the timing argument
# cannot justify.
NAIVE_EARLY_GRANT_TEXT = """\
x=0;
*[
  [| C1.r_e & C1.r_a & ~x -> C1.a+; [~C1.r_e];
       [|    C2.r -> C2.a+; x+; [~C1.r_a]; C1.a-
       [] ~C1.r_a -> C1.a-
       |]
  []            x | C2.r -> C2.a+
  |];
  [ ~C2.a -> skip
  []  C2.a -> [~C2.r]; C2.a-; x-
  ]
]
"""

# Environment closures for exhaustive exploration: one canonical
# four-phase cycle per client, early wire lowered strictly before the
# actual wire.  Request raises are sequenced r_e then r_a to keep the
# closed state space finite; the explorer's interleavings still admit
# anything happening between the two.
ENV_C1_EARLY_ACTUAL_TEXT = \
    "*[ C1.r_e+; C1.r_a+; [C1.a]; C1.r_e-; C1.r_a-; [~C1.a] ]"
ENV_C2_SIMPLE_TEXT = \
    "*[ C2.r+; [C2.a]; C2.r-; [~C2.a] ]"
ENV_C2_EARLY_ACTUAL_TEXT = \
    "*[ C2.r_e+; C2.r_a+; [C2.a]; C2.r_e-; C2.r_a-; [~C2.a] ]"


_TEXTS = {
    ServerVariant.BASELINE: BASELINE_ASYM_TEXT,
    ServerVariant.ASYM_THREE_ARBITER: ASYM_THREE_ARBITER_TEXT,
    ServerVariant.ASYM_TWO_PROCESS: ASYM_TWO_PROCESS_TEXT,
    ServerVariant.ASYM_FOUR_WAY: ASYM_FOUR_WAY_TEXT,
    ServerVariant.ASYM_SINGLE_ARBITER: ASYM_SINGLE_ARBITER_TEXT,
    ServerVariant.SYMMETRIC: SYMMETRIC_TEXT,
    ServerVariant.SYMMETRIC_SINGLE_ARBITER: SYMMETRIC_SINGLE_ARBITER_TEXT,
    ServerVariant.NAIVE_EARLY_GRANT: NAIVE_EARLY_GRANT_TEXT,
}

_PROC_NAMES = {
    ServerVariant.BASELINE: ("server",),
    ServerVariant.ASYM_THREE_ARBITER: ("server",),
    ServerVariant.ASYM_TWO_PROCESS: ("completion", "server"),
    ServerVariant.ASYM_FOUR_WAY: ("completion", "server"),
    ServerVariant.ASYM_SINGLE_ARBITER: ("completion", "arbiter", "server"),
    ServerVariant.SYMMETRIC:
        ("completion_c1", "completion_c2", "server"),
    ServerVariant.SYMMETRIC_SINGLE_ARBITER:
        ("completion_c1", "completion_c2", "arbiter", "server"),
    ServerVariant.NAIVE_EARLY_GRANT: ("server",),
}

SYMMETRIC_FAMILY = frozenset((
    ServerVariant.SYMMETRIC,
    ServerVariant.SYMMETRIC_SINGLE_ARBITER,
))

_INV_LABEL = "completion flag low whenever a mode flag is high"


def _commit_invariants(variant: ServerVariant) -> Dict[int, tuple]:
    if variant in (ServerVariant.ASYM_FOUR_WAY,
                   ServerVariant.ASYM_SINGLE_ARBITER):
        sel_proc = len(_PROC_NAMES[variant]) - 1
        return {sel_proc: (parse_guard("~f | ~g"), _INV_LABEL)}
    if variant is ServerVariant.SYMMETRIC_SINGLE_ARBITER:
        g = parse_guard("(~f1 | ~g1) & (~f2 | ~g2)")
        return {3: (g, _INV_LABEL)}
    if variant is ServerVariant.SYMMETRIC:
        g = parse_guard("(~f1 | ~g1) & (~f2 | ~g2)")
        return {2: (g, _INV_LABEL)}
    return {}


def channels_for(variant: ServerVariant) -> Tuple[ChannelSpec, ChannelSpec]:
    c1 = ChannelSpec.early_actual("C1")
    if variant in SYMMETRIC_FAMILY:
        return (c1, ChannelSpec.early_actual("C2"))
    return (c1, ChannelSpec.simple("C2"))


def channel_wires(variant: ServerVariant) -> frozenset:
    out = []
    for ch in channels_for(variant):
        out.extend(ch.wires())
    return frozenset(out)


@dataclass(frozen=True)
class ServerBuild:
    """A parsed server with everything the engine needs to run it."""

    variant: ServerVariant
    opportunism_enabled: bool
    process_set: ast.ProcessSet
    proc_names: Tuple[str, ...]
    commit_invariants: dict
    channels: Tuple[ChannelSpec, ChannelSpec]

    @property
    def channel_wires(self) -> frozenset:
        out = []
        for ch in self.channels:
            out.extend(ch.wires())
        return frozenset(out)


def server_text(variant: ServerVariant,
                opportunism_enabled: bool = True) -> str:
    """Program text; with opportunism off every variant degrades to the
    baseline over its own channel wires."""
    if not opportunism_enabled:
        if variant in SYMMETRIC_FAMILY:
            return BASELINE_SYM_TEXT
        return BASELINE_ASYM_TEXT
    return _TEXTS[variant]


def server_build(variant: ServerVariant,
                 opportunism_enabled: bool = True) -> ServerBuild:
    text = server_text(variant, opportunism_enabled)
    wires = channel_wires(variant)
    ps = parse_hse(text, known_wires=wires)
    if opportunism_enabled:
        names = _PROC_NAMES[variant]
        invariants = _commit_invariants(variant)
    else:
        names = ("server",)
        invariants = {}
    return ServerBuild(
        variant=variant,
        opportunism_enabled=opportunism_enabled,
        process_set=ps,
        proc_names=names,
        commit_invariants=invariants,
        channels=channels_for(variant),
    )


def build_server(variant: ServerVariant,
                 opportunism_enabled: bool = True) -> ast.ProcessSet:
    return server_build(variant, opportunism_enabled).process_set


def env_closure_texts(variant: ServerVariant) -> Tuple[str, str]:
    if variant in SYMMETRIC_FAMILY:
        return (ENV_C1_EARLY_ACTUAL_TEXT, ENV_C2_EARLY_ACTUAL_TEXT)
    return (ENV_C1_EARLY_ACTUAL_TEXT, ENV_C2_SIMPLE_TEXT)


def closed_build(variant: ServerVariant,
                 opportunism_enabled: bool = True) -> ServerBuild:
    """Server composed with one canonical environment cycle per client,
    for exhaustive exploration (no client generators involved)."""
    base = server_build(variant, opportunism_enabled)
    env_ps = [parse_hse(t, known_wires=channel_wires(variant))
              for t in env_closure_texts(variant)]
    procs = base.process_set.processes + tuple(
        p for e in env_ps for p in e.processes)
    ps = ast.ProcessSet(procs, base.process_set.initial)
    names = base.proc_names + ("env_c1", "env_c2")
    return ServerBuild(
        variant=base.variant,
        opportunism_enabled=base.opportunism_enabled,
        process_set=ps,
        proc_names=names,
        commit_invariants=base.commit_invariants,
        channels=base.channels,
    )
