"""Gate-level production rules: parsing, simulation, hazards, timing.

A rule `guard -> node+` (or `node-`) drives its target high (low) a
bounded delay after its guard turns true.  At most one rule may drive
each (node, direction); the pair forms a gate.  A rule marked `(*)` is
combinational: the complement rule with the negated guard is implied,
so the gate tracks its guard continuously.  Unmarked gates are
state-holding and keep their value while neither rule is enabled.

`arbiter(in1, in2) -> (out1, out2)` declares a mutual-exclusion
element: out1 grants in1, out2 grants in2, never both at once.  Under
contention one side wins after a resolution delay, the pick drawn from
the run seed.

Hazards are recorded, never fatal.  A guard that drops before its
scheduled transition fires is an instability; a node whose up and down
rules are enabled together is an interference.

Rule delays are configuration, not syntax: parsing assigns the default
gate interval, and `simulate` accepts a DelayPolicy that overrides per
target node.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import kernel, sim
from .hse import ast as hast
from .hse.parser import HseSyntaxError, parse_guard
from .timing import TimeInterval

__all__ = [
    "ArbiterInstance", "CHANNEL_WIRES", "DEFAULT_GATE_DELAY", "Hazard",
    "HazardKind", "Netlist", "NetlistError", "ProductionRule",
    "PrsSyntaxError", "RESET_NODE", "TimingAssumptionReport",
    "build_netlist", "builtin_asym_netlist", "check_timing_assumption",
    "format_hazard", "format_prs", "parse_prs", "parse_stimulus",
    "prs_vs_hse_conformance", "quiescent_state", "random_handshake_stimulus",
    "reset_state", "reset_stimulus", "simulate",
    "overlap_scenario_stimulus", "tight_race_stimulus",
    "too_early_scenario_stimulus",
]

DEFAULT_GATE_DELAY = TimeInterval(1, 2)
RESET_NODE = "Reset"

# The five wires both layers expose; conformance compares orderings
# restricted to exactly these.
CHANNEL_WIRES = frozenset(
    ("C1.r_e", "C1.r_a", "C1.a", "C2.r", "C2.a"))


class PrsSyntaxError(ValueError):
    def __init__(self, lineno: int, msg: str):
        self.lineno = lineno
        super().__init__("line %d: %s" % (lineno, msg))


class NetlistError(ValueError):
    """Structural problem: driver conflicts, dangling nodes, bad state."""


# ---------------------------------------------------------------------------
# Types

class HazardKind(enum.Enum):
    INSTABILITY = "instability"
    INTERFERENCE = "interference"


@dataclass(frozen=True)
class Hazard:
    kind: HazardKind
    node: str
    time: int
    detail: str


def format_hazard(h: Hazard) -> str:
    return "%s %s t=%d %s" % (h.kind.value, h.node, h.time, h.detail)


@dataclass(frozen=True)
class ProductionRule:
    guard: hast.Guard
    target: str
    direction: str                      # "up" | "down"
    combinational: bool = False
    delay: TimeInterval = DEFAULT_GATE_DELAY

    def __post_init__(self):
        if self.direction not in ("up", "down"):
            raise ValueError("direction must be 'up' or 'down'")

    @property
    def value(self) -> int:
        return 1 if self.direction == "up" else 0

    def complement(self) -> "ProductionRule":
        """The implied opposite half of a combinational gate."""
        return ProductionRule(hast.Not(self.guard), self.target,
                              "down" if self.direction == "up" else "up",
                              True, self.delay)


@dataclass(frozen=True)
class ArbiterInstance:
    in1: str
    in2: str
    out1: str
    out2: str
    resolution_delay: TimeInterval = DEFAULT_GATE_DELAY


@dataclass(frozen=True)
class Netlist:
    rules: Tuple[ProductionRule, ...]
    arbiters: Tuple[ArbiterInstance, ...]
    inputs: frozenset
    outputs: frozenset
    node_order: Tuple[str, ...]

    def elaborated(self) -> Tuple[ProductionRule, ...]:
        """Source rules plus the implied combinational complements."""
        out = list(self.rules)
        for r in self.rules:
            if r.combinational:
                out.append(r.complement())
        return tuple(out)

    def with_gate_delay(self, node: str, interval: TimeInterval) -> "Netlist":
        """Copy with both rules of `node` re-delayed."""
        if not any(r.target == node for r in self.rules):
            raise NetlistError("no rule drives %r" % node)
        rules = tuple(replace(r, delay=interval) if r.target == node else r
                      for r in self.rules)
        return replace(self, rules=rules)


# ---------------------------------------------------------------------------
# Parsing and printing

_NAME = r"[A-Za-z_][A-Za-z0-9_.]*"
_ARB_RE = re.compile(
    r"^arbiter\s*\(\s*(%s)\s*,\s*(%s)\s*\)\s*->\s*"
    r"\(\s*(%s)\s*,\s*(%s)\s*\)$" % ((_NAME,) * 4))
_TARGET_RE = re.compile(r"^(%s)\s*([+-])$" % _NAME)


def _guard_nodes_ordered(g: hast.Guard, out: List[str], seen: set) -> None:
    # Left-to-right, first appearance; set-based walks would leak hash
    # order into node indices and break cross-process determinism.
    if isinstance(g, hast.Ref):
        if g.name not in seen:
            seen.add(g.name)
            out.append(g.name)
    elif isinstance(g, hast.Not):
        _guard_nodes_ordered(g.operand, out, seen)
    else:
        _guard_nodes_ordered(g.left, out, seen)
        _guard_nodes_ordered(g.right, out, seen)


def build_netlist(rules: Iterable[ProductionRule],
                  arbiters: Iterable[ArbiterInstance] = (),
                  inputs: Optional[Iterable[str]] = None,
                  outputs: Optional[Iterable[str]] = None) -> Netlist:
    """Assemble and validate a netlist.

    inputs=None infers them as the nodes read but never driven; passing
    an explicit set instead turns any undriven stray reference into a
    dangling-node error, which is what you want for a transcription.
    outputs=None infers driven nodes that no guard reads.
    """
    rules = tuple(rules)
    arbiters = tuple(arbiters)

    order: List[str] = []
    seen: set = set()

    def note(name):
        if name not in seen:
            seen.add(name)
            order.append(name)

    driven: Dict[Tuple[str, str], ProductionRule] = {}
    for r in rules:
        key = (r.target, r.direction)
        if key in driven:
            raise NetlistError("two rules drive %s%s" %
                               (r.target, "+" if r.direction == "up" else "-"))
        driven[key] = r
        _guard_nodes_ordered(r.guard, order, seen)
        note(r.target)
    # A combinational half implies the other; an explicit rule there
    # would fight the implied one.
    for r in rules:
        if r.combinational:
            opp = (r.target, "down" if r.direction == "up" else "up")
            if opp in driven:
                raise NetlistError(
                    "combinational %s conflicts with an explicit %s rule"
                    % (r.target, "+" if opp[1] == "up" else "-"))

    rule_targets = {r.target for r in rules}
    arb_outs: set = set()
    for a in arbiters:
        for n in (a.in1, a.in2):
            note(n)
        for n in (a.out1, a.out2):
            if n in rule_targets:
                raise NetlistError(
                    "%s is driven by both an arbiter and rules" % n)
            if n in arb_outs:
                raise NetlistError("%s is driven by two arbiters" % n)
            arb_outs.add(n)
            note(n)

    driven_nodes = rule_targets | arb_outs
    read_nodes = set()
    for r in rules:
        read_nodes |= r.guard.nodes()
    for a in arbiters:
        read_nodes.add(a.in1)
        read_nodes.add(a.in2)

    if inputs is None:
        input_set = frozenset(read_nodes - driven_nodes)
    else:
        input_set = frozenset(inputs)
        for n in sorted(input_set):
            if n in driven_nodes:
                raise NetlistError("input %s is driven" % n)
            note(n)
        for n in sorted(read_nodes - driven_nodes - input_set):
            raise NetlistError("dangling node %s" % n)

    if outputs is None:
        output_set = frozenset(driven_nodes - read_nodes)
    else:
        output_set = frozenset(outputs)
        for n in sorted(output_set - driven_nodes):
            raise NetlistError("declared output %s is not driven" % n)

    return Netlist(rules, arbiters, input_set, output_set, tuple(order))


def parse_prs(text: str,
              inputs: Optional[Iterable[str]] = None,
              outputs: Optional[Iterable[str]] = None,
              default_delay: TimeInterval = DEFAULT_GATE_DELAY) -> Netlist:
    """Parse rule text: one `guard -> node+` / `node-` per line, `(*)`
    suffix for combinational gates, `arbiter(a, b) -> (x, y)`
    declarations, `#` comments."""
    rules: List[ProductionRule] = []
    arbiters: List[ArbiterInstance] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("arbiter"):
            m = _ARB_RE.match(line)
            if not m:
                raise PrsSyntaxError(lineno, "bad arbiter declaration")
            arbiters.append(ArbiterInstance(*m.groups(),
                                            resolution_delay=default_delay))
            continue
        if "->" not in line:
            raise PrsSyntaxError(lineno, "expected 'guard -> node+/-'")
        lhs, rhs = line.rsplit("->", 1)
        rhs = rhs.strip()
        comb = rhs.endswith("(*)")
        if comb:
            rhs = rhs[:-3].strip()
        m = _TARGET_RE.match(rhs)
        if not m:
            raise PrsSyntaxError(lineno, "bad rule target %r" % rhs)
        try:
            guard = parse_guard(lhs.strip())
        except HseSyntaxError as e:
            raise PrsSyntaxError(lineno, "bad guard: %s" % e) from None
        rules.append(ProductionRule(
            guard, m.group(1), "up" if m.group(2) == "+" else "down",
            comb, default_delay))
    try:
        return build_netlist(rules, arbiters, inputs, outputs)
    except NetlistError:
        raise


def format_prs(net: Netlist) -> str:
    """Source form; parses back to an equal netlist under the same
    input/output declarations and default delay."""
    lines = []
    for r in net.rules:
        lines.append("%s -> %s%s%s" % (
            hast.format_guard(r.guard), r.target,
            "+" if r.direction == "up" else "-",
            " (*)" if r.combinational else ""))
    for a in net.arbiters:
        lines.append("arbiter(%s, %s) -> (%s, %s)" %
                     (a.in1, a.in2, a.out1, a.out2))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# The asymmetric server at gate level.
#
# One client on an early/actual request channel, one on a plain
# channel, one arbiter.  Underscore-prefixed names are the inverted
# forms of their base nodes.  Inputs: Reset, C1.r_e, C1.r_a, C2.r.

ASYM_SERVER_PRS_TEXT = """\
# Reset rails.
~Reset -> _Reset+ (*)
~_Reset | ~C1.r_e -> _C1.r_e+ (*)

# Grant-register completion rails; reg flags any latched grant.
~u_reg1 -> _u_reg1+ (*)
~u_reg2 -> _u_reg2+ (*)
~v_reg1 -> _v_reg1+ (*)
~v_reg2 -> _v_reg2+ (*)
_u_reg1 & _u_reg2 & _v_reg1 & _v_reg2 -> reg- (*)

# Arbiter request function.  NOTE transcription grouping: ~reg & ~g
# prefixes both phase arms; there is no reset disjunct in the up guard.
~reg & ~g & ((~_f & ~C1.r_e) | (~f & ~_C1.r_e)) -> G_arb+
Reset | (reg & (v_reg1 | v_reg2)) -> G_arb-

# Grant pair.  v answers G_arb and u answers C2.r: the register rules
# bind u to the plain channel (u_reg2 drives the C2 acknowledge) and v
# to the guard side (v_reg2 drives the C1 acknowledge), so the output
# list is written input-aligned.
arbiter(G_arb, C2.r) -> (v, u)
~u -> _u+ (*)
~v -> _v+ (*)

# g_reg remembers a guard-side grant taken with f high until the
# re-arm handshake completes.
~f & ~C1.a & ~g -> _g_reg+
C1.a & v_reg1 & reg -> _g_reg-
~_g_reg -> g_reg+ (*)

# Grant registers: *_reg1 latches a grant taken while f is high,
# *_reg2 one taken while f is low.
~_u & ~_f & ~reg -> u_reg1+
Reset | (reg & _g & _f & _C1.a) -> u_reg1-
~_v & ~_f & ~reg -> v_reg1+
Reset | (reg & _f & _v) -> v_reg1-
~_u & ~f & ~reg -> u_reg2+
Reset | (reg & _g & _u) -> u_reg2-
~_v & ~f & ~reg & ~g_reg -> v_reg2+
Reset | (reg & C1.a & f & _v) -> v_reg2-

# Mode flags g and f.
~_Reset | (~C1.a & ~f) -> _g+
((reg & u_reg1) | g_reg) & f -> _g-
~_g -> g+ (*)
# NOTE transcription grouping: the reset disjunct stands alone; the
# remainder is one conjunction guarded by ~_g.
~_Reset | (((~_u_reg1 & ~C1.a) | ~_v_reg1) & ~_g) -> _f+
reg & v_reg2 & C1.a -> _f-
~_f -> f+
Reset | (g & _f) -> f-

# C1 acknowledge.  NOTE transcription grouping: the reset disjunct
# stands alone; the remainder is one conjunction.
~_Reset | (~v_reg2 & (~_u_reg1 | ~_g_reg) & ~C1.r_a & ~C1.r_e) -> _C1.a+
_g_reg & C1.r_a & C1.r_e & v_reg2 & reg -> _C1.a-
~_C1.r_e & ~_C1.a -> C1.a+
Reset | (_C1.r_e & _C1.a) -> C1.a-

# C2 acknowledge.
~C2.r & ~u_reg2 -> _C2.a+
reg & u_reg2 & C2.r -> _C2.a-
~_C2.a -> C2.a+ (*)
"""

_ASYM_INPUTS = frozenset((RESET_NODE, "C1.r_e", "C1.r_a", "C2.r"))
_ASYM_OUTPUTS = frozenset(("C1.a", "C2.a"))


def builtin_asym_netlist(
        default_delay: TimeInterval = DEFAULT_GATE_DELAY) -> Netlist:
    return parse_prs(ASYM_SERVER_PRS_TEXT,
                     inputs=_ASYM_INPUTS, outputs=_ASYM_OUTPUTS,
                     default_delay=default_delay)


# ---------------------------------------------------------------------------
# Engine glue

def _guard_rpn(g: hast.Guard, idx: Dict[str, int], out: List[int]) -> None:
    if isinstance(g, hast.Ref):
        out.append(idx[g.name])
    elif isinstance(g, hast.Not):
        _guard_rpn(g.operand, idx, out)
        out.append(kernel.RPN_NOT)
    elif isinstance(g, hast.And):
        _guard_rpn(g.left, idx, out)
        _guard_rpn(g.right, idx, out)
        out.append(kernel.RPN_AND)
    elif isinstance(g, hast.Or):
        _guard_rpn(g.left, idx, out)
        _guard_rpn(g.right, idx, out)
        out.append(kernel.RPN_OR)
    else:
        raise NetlistError("unsupported guard node %r" % (g,))


class _Tables:
    def __init__(self, net: Netlist,
                 delays: Optional[sim.DelayPolicy],
                 suppress: frozenset):
        names = net.node_order
        idx = {n: i for i, n in enumerate(names)}
        elab = net.elaborated()
        self.names = names
        self.idx = idx
        self.elab = elab
        self.rule_rpn = []
        self.rule_target = []
        self.rule_val = []
        self.rule_lo = []
        self.rule_hi = []
        self.up_rule = [-1] * len(names)
        self.down_rule = [-1] * len(names)
        self.trigger_map = [[] for _ in names]
        for r, rule in enumerate(elab):
            if r in suppress:
                rpn = [kernel.RPN_FALSE]
            else:
                rpn = []
                _guard_rpn(rule.guard, idx, rpn)
            self.rule_rpn.append(rpn)
            t = idx[rule.target]
            self.rule_target.append(t)
            self.rule_val.append(rule.value)
            iv = rule.delay if delays is None \
                else delays.interval_for(rule.target)
            self.rule_lo.append(iv.lo)
            self.rule_hi.append(iv.hi)
            if rule.direction == "up":
                self.up_rule[t] = r
            else:
                self.down_rule[t] = r
            support: List[str] = []
            _guard_nodes_ordered(rule.guard, support, set())
            for n in support:
                self.trigger_map[idx[n]].append(r)
        self.arbiters = []
        for a in net.arbiters:
            res = a.resolution_delay
            self.arbiters.append((idx[a.in1], idx[a.in2],
                                  idx[a.out1], idx[a.out2],
                                  res.lo, res.hi, res.lo, res.hi))


def reset_state(net: Netlist) -> Dict[str, int]:
    """Fixed point of the rules with Reset held high and all other
    inputs low: the state a physical reset pulse establishes.  Without
    a Reset input everything starts low."""
    tb = _Tables(net, None, frozenset())
    names = tb.names
    values = [0] * len(names)
    if RESET_NODE in tb.idx:
        values[tb.idx[RESET_NODE]] = 1
    elif RESET_NODE not in net.inputs:
        return {n: 0 for n in names}
    for _ in range(4 * len(names) + 8):
        changed = False
        for node in range(len(names)):
            u = tb.up_rule[node]
            d = tb.down_rule[node]
            if u < 0 and d < 0:
                continue
            ue = kernel.eval_rpn(tb.rule_rpn[u], values) if u >= 0 else 0
            de = kernel.eval_rpn(tb.rule_rpn[d], values) if d >= 0 else 0
            new = 1 if (ue and not de) else (0 if (de and not ue)
                                             else values[node])
            if new != values[node]:
                values[node] = new
                changed = True
        for (i0, i1, o0, o1, *_rest) in tb.arbiters:
            for (i, o, other) in ((i0, o0, o1), (i1, o1, o0)):
                new = values[o]
                if not values[i]:
                    new = 0
                elif not values[other]:
                    new = 1
                if new != values[o]:
                    values[o] = new
                    changed = True
        if not changed:
            return dict(zip(names, values))
    raise NetlistError("reset state does not settle")


def _kernel_hazard(names, h) -> Hazard:
    kind, node, time, since = h
    if kind == kernel.HZ_INSTABILITY:
        return Hazard(HazardKind.INSTABILITY, names[node], time,
                      "enabled at t=%d, guard lost at t=%d before firing"
                      % (since, time))
    return Hazard(HazardKind.INTERFERENCE, names[node], time,
                  "up and down rules enabled together at t=%d" % time)


def simulate(net: Netlist,
             stimuli: Sequence[Tuple[int, str, int]],
             horizon: int,
             seed: int,
             delays: Optional[sim.DelayPolicy] = None,
             sampling: Optional[sim.Sampling] = None,
             init: Optional[Dict[str, int]] = None,
             _suppress: frozenset = frozenset()
             ) -> Tuple[sim.Trace, List[Hazard]]:
    """Event-driven run.  Returns (trace, hazards); hazards never abort.

    stimuli are (time, node, value) on input nodes only.  The initial
    state is the reset fixed point when the net has a Reset input, all
    low otherwise; `init` overrides it (partial dicts allowed), and any
    rule the initial state already enables fires from t=0.
    """
    stim: List[Tuple[int, str, int]] = []
    for (t, node, val) in stimuli:
        if node not in net.inputs:
            raise ValueError("stimulus drives non-input node %r" % node)
        if val not in (0, 1):
            raise ValueError("stimulus value must be 0 or 1")
        if t < 0:
            raise ValueError("stimulus time must be >= 0")
        stim.append((int(t), node, int(val)))
    stim.sort(key=lambda s: s[0])
    if sampling is None:
        sampling = delays.sampling if delays is not None \
            else sim.Sampling.UNIFORM_RANDOM
    if sampling is sim.Sampling.EXHAUSTIVE_ENDPOINTS:
        raise ValueError("exhaustive sampling needs an exploration driver")

    tb = _Tables(net, delays, _suppress)
    base = reset_state(net)
    if init:
        base.update(init)
    init_values = [base.get(n, 0) for n in tb.names]
    eng = kernel.PrsEngine(
        len(tb.names), tb.names, init_values,
        tb.rule_rpn, tb.rule_target, tb.rule_val, tb.rule_lo, tb.rule_hi,
        tb.trigger_map, tb.up_rule, tb.down_rule, tb.arbiters,
        horizon, seed,
        stimuli=[(t, tb.idx[n], v) for (t, n, v) in stim],
        sample_mode=sim.kernel_mode(sampling))
    for r in range(len(tb.elab)):
        eng._retrigger(r)
    for ai in range(len(tb.arbiters)):
        eng._arb_update(ai)
    eng.run()
    trace = sim.Trace(
        transitions=[(t, tb.names[n], v) for (t, n, v) in eng.transitions],
        usage={}, seed=seed, variant="prs", horizon=horizon)
    return trace, [_kernel_hazard(tb.names, h) for h in eng.hazards]


def quiescent_state(net: Netlist) -> Dict[str, int]:
    """Settled values after the reset pulse ends, fastest delays."""
    tr, _ = simulate(net, reset_stimulus(), horizon=10 ** 6, seed=0,
                     sampling=sim.Sampling.LOW_ENDPOINT)
    vals = reset_state(net)
    for (_, n, v) in tr.transitions:
        vals[n] = v
    return vals


# ---------------------------------------------------------------------------
# Stimuli
#
# Times are picked with generous margins so every cascade settles
# between steps at default gate delays; the race helper deliberately
# does not.

def reset_stimulus() -> Tuple[Tuple[int, str, int], ...]:
    """End of the reset pulse (the pulse itself is the initial state)."""
    return ((0, RESET_NODE, 0),)


def overlap_scenario_stimulus(start: int = 50, spacing: int = 40
                              ) -> Tuple[Tuple[int, str, int], ...]:
    """Advance approval: C1 requests, early-releases, C2 asks inside
    the lead window, C1 actually releases afterwards.  The second
    acknowledge rises before the first falls."""
    t0 = start
    t1 = t0 + 2 * spacing           # early release, usage continues
    t2 = t1 + spacing               # waiting request inside the window
    t3 = t2 + spacing               # actual release
    t4 = t3 + 2 * spacing           # second client done
    return ((0, RESET_NODE, 0),
            (t0, "C1.r_e", 1), (t0, "C1.r_a", 1),
            (t1, "C1.r_e", 0),
            (t2, "C2.r", 1),
            (t3, "C1.r_a", 0),
            (t4, "C2.r", 0))


def too_early_scenario_stimulus(start: int = 50, spacing: int = 40
                                ) -> Tuple[Tuple[int, str, int], ...]:
    """The waiting request arrives before the early release, so it must
    queue behind the full C1 handshake."""
    t0 = start
    t1 = t0 + spacing               # C2 asks while C1 still holds r_e
    t2 = t1 + spacing               # early release
    t3 = t2 + spacing               # actual release
    t4 = t3 + 3 * spacing           # second client done
    return ((0, RESET_NODE, 0),
            (t0, "C1.r_e", 1), (t0, "C1.r_a", 1),
            (t1, "C2.r", 1),
            (t2, "C1.r_e", 0),
            (t3, "C1.r_a", 0),
            (t4, "C2.r", 0))


def tight_race_stimulus(start: int = 50, spacing: int = 40,
                        stagger: int = 1
                        ) -> Tuple[Tuple[int, str, int], ...]:
    """Competing request lands `stagger` ticks after the early release,
    racing the freshly armed arbiter guard.  A slow guard gate loses
    the race and its pending rise is cancelled."""
    t0 = start
    t1 = t0 + 2 * spacing
    t2 = t1 + stagger
    t3 = t2 + 2 * spacing
    t4 = t3 + 2 * spacing
    return ((0, RESET_NODE, 0),
            (t0, "C1.r_e", 1), (t0, "C1.r_a", 1),
            (t1, "C1.r_e", 0),
            (t2, "C2.r", 1),
            (t3, "C1.r_a", 0),
            (t4, "C2.r", 0))


def random_handshake_stimulus(seed: int, cycles: int = 3,
                              spacing: int = 40
                              ) -> Tuple[Tuple[int, str, int], ...]:
    """Seeded workload mixing plain, overlapping, and too-early cycles.

    Gaps stay at or above `spacing`, which at default gate delays keeps
    every cascade comfortably inside its window.
    """
    rng = kernel.Stream(kernel.derive_stream_seed(seed, "prs-stim"))
    ev: List[Tuple[int, str, int]] = [(0, RESET_NODE, 0)]
    t = spacing + rng.randbelow(spacing)

    def gap():
        return spacing + rng.randbelow(spacing)

    for _ in range(cycles):
        mode = rng.randbelow(3)     # 0 plain, 1 overlap, 2 too early
        ev.append((t, "C1.r_e", 1))
        ev.append((t, "C1.r_a", 1))
        t += 2 * gap()              # usage
        if mode == 2:
            ev.append((t, "C2.r", 1))
            t += gap()
        ev.append((t, "C1.r_e", 0))
        t += gap()
        if mode == 1:
            ev.append((t, "C2.r", 1))
            t += gap()
        ev.append((t, "C1.r_a", 0))
        t += 2 * gap()
        if mode:
            ev.append((t, "C2.r", 0))
            t += gap()
        t += gap()
    return tuple(ev)


def parse_stimulus(text: str) -> Tuple[Tuple[int, str, int], ...]:
    """Stimulus files reuse the trace transition-line format:
    `time,node,value`, one per line, `#` comments."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise PrsSyntaxError(lineno, "expected 'time,node,value'")
        try:
            out.append((int(parts[0]), parts[1], int(parts[2])))
        except ValueError:
            raise PrsSyntaxError(lineno, "bad number in %r" % line) from None
    return tuple(out)


# ---------------------------------------------------------------------------
# Timing assumption

@dataclass(frozen=True)
class TimingAssumptionReport:
    """sup of the arbiter-guard gate delay against inf of the measured
    re-arm path; the guard must win strictly."""
    satisfied: bool
    guard_node: str
    guard_delay_sup: int
    f_node: str
    f_path_inf: int
    path: Tuple[Tuple[int, str, int], ...]

    def __str__(self):
        rel = "<" if self.satisfied else ">="
        return ("timing assumption %s: sup(%s gate) = %d %s inf(%s path) = %d"
                % ("satisfied" if self.satisfied else "VIOLATED",
                   self.guard_node, self.guard_delay_sup, rel,
                   self.f_node, self.f_path_inf))


def check_timing_assumption(net: Netlist,
                            guard_node: Optional[str] = None,
                            f_node: str = "f") -> TimingAssumptionReport:
    """Race the arbiter guard gate against the re-arm path it protects.

    The guard gate recomputes whenever the mode flag `f` moves; its
    pending rise is safe only if it lands before the competing side can
    flip `f` back.  The bound is measured, not guessed: from the
    settled granted state, release the guarded client, inject the
    competing request, hold the guard's own up rule off, run every gate
    at its fastest, and time the stretch from the competing grant to
    the f down-transition.  The grant hop answers the environment and
    is excluded from the sum (requests may arrive arbitrarily fast);
    the gates after it are what the guard races.  Strict inequality
    required: equality leaves a zero-width window.
    """
    if not net.arbiters:
        raise NetlistError("no arbiter, so no guard node to check")
    arb = net.arbiters[0]
    targets = {r.target for r in net.rules}
    if guard_node is None:
        cand = [x for x in (arb.in1, arb.in2) if x in targets]
        if len(cand) != 1:
            raise NetlistError("cannot designate the arbiter guard input")
        guard_node = cand[0]
    if guard_node not in targets:
        raise NetlistError("designated node %r absent or undriven"
                           % guard_node)
    if f_node not in net.node_order:
        raise NetlistError("designated node %r absent" % f_node)
    g_up = next((r for r in net.rules
                 if r.target == guard_node and r.direction == "up"), None)
    if g_up is None:
        raise NetlistError("no up rule drives %r" % guard_node)
    g_sup = g_up.delay.hi

    if guard_node == arb.in1:
        env_req, env_grant = arb.in2, arb.out2
    else:
        env_req, env_grant = arb.in1, arb.out1
    if env_req not in net.inputs:
        raise NetlistError("competing request %r is not an input" % env_req)
    reqs = sorted(net.inputs - {RESET_NODE, env_req})

    # Settled granted state, fastest delays.
    stim = list(reset_stimulus()) + [(0, w, 1) for w in reqs]
    tr1, _ = simulate(net, stim, horizon=10 ** 6, seed=0,
                      sampling=sim.Sampling.LOW_ENDPOINT)
    state = reset_state(net)
    for (_, n, v) in tr1.transitions:
        state[n] = v
    if state.get(f_node) != 1:
        raise NetlistError("%r never rises in the canonical grant scenario"
                           % f_node)

    elab = net.elaborated()
    sup_idx = next(i for i, r in enumerate(elab)
                   if r.target == guard_node and r.direction == "up")
    stim2 = [(0, w, 0) for w in reqs] + [(0, env_req, 1)]
    tr2, _ = simulate(net, stim2, horizon=10 ** 6, seed=0,
                      sampling=sim.Sampling.LOW_ENDPOINT,
                      init=state, _suppress=frozenset((sup_idx,)))
    t_grant = next((t for (t, n, v) in tr2.transitions
                    if n == env_grant and v == 1), None)
    if t_grant is None:
        raise NetlistError("the competing grant never fires")
    t_f = next((t for (t, n, v) in tr2.transitions
                if n == f_node and v == 0 and t >= t_grant), None)
    if t_f is None:
        raise NetlistError("no re-arm path: %r never falls after the "
                           "competing grant" % f_node)
    path = tuple((t, n, v) for (t, n, v) in tr2.transitions
                 if t_grant <= t <= t_f)
    f_path_inf = t_f - t_grant
    return TimingAssumptionReport(g_sup < f_path_inf, guard_node, g_sup,
                                  f_node, f_path_inf, path)


# ---------------------------------------------------------------------------
# Conformance against the guarded-command server

def prs_vs_hse_conformance(net: Netlist, hse_trace: sim.Trace,
                           variant=None, seed: int = 0,
                           max_runs: int = 20000) -> bool:
    """True iff the netlist, driven with the channel-input transitions
    of `hse_trace`, produces a channel-wire ordering the guarded-command
    server can also produce when the same input sequence is replayed
    under exhaustive exploration.

    Missing channel wires in the netlist are non-conformance, not an
    error; a trace with no channel transitions is vacuously conformant.
    """
    from . import verify
    from . import servers

    if variant is None:
        variant = servers.ServerVariant.ASYM_SINGLE_ARBITER
    trace_nodes = {n for (_, n, _) in hse_trace.transitions}
    if trace_nodes and not (trace_nodes & CHANNEL_WIRES):
        raise ValueError("trace carries no channel wires")
    chan = [(t, n, v) for (t, n, v) in hse_trace.transitions
            if n in CHANNEL_WIRES]
    if not chan:
        return True
    if not CHANNEL_WIRES <= set(net.node_order):
        return False

    stim_wires = CHANNEL_WIRES & net.inputs
    replay = [(t, n, v) for (t, n, v) in chan if n in stim_wires]
    offset = 60
    stimulus = list(reset_stimulus()) + \
        [(t + offset, n, v) for (t, n, v) in replay]
    horizon = stimulus[-1][0] + 400
    ptr, _ = simulate(net, stimulus, horizon, seed)
    prs_ord = tuple((n, v) for (_, n, v) in ptr.transitions
                    if n in CHANNEL_WIRES)
    if not prs_ord:
        return False

    build = servers.server_build(variant, True)
    env = hast.Seq(tuple(hast.Assign(n, v == 1) for (_, n, v) in replay))
    ps = hast.ProcessSet(build.process_set.processes + (env,),
                         build.process_set.initial)
    res = verify.explore(
        ps, depth=len(prs_ord),
        delays=sim.DelayPolicy(default=TimeInterval(1, 1)),
        arb_latency=verify.EQUIV_ARB_LATENCY,
        visible_nodes=sorted(CHANNEL_WIRES),
        max_runs=max_runs, on_cap="raise")
    return prs_ord in res.orderings
