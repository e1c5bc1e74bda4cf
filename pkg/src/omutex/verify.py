"""Safety and performance analysis over recorded traces.

Checkers are pure functions over immutable traces: mutual exclusion on
the derived usage intervals (half-open, so exact endpoint handover is
not an overlap), four-phase handshake conformance per channel, and the
idle-time / acknowledge-overlap metrics the opportunistic servers exist
to improve.

Two exhaustive oracles live here as well.  `explore` drives the timed
interpreter through every resolution of its decision points (arbiter
picks and, under exhaustive endpoint sampling, every delay-interval
endpoint) up to a visible-transition depth, and collects the set of
channel-wire orderings plus any violation found on any branch.
`untimed_orderings` is an independent check that never runs the timed
engine at all: it enumerates raw interleavings of the compiled
programs, treating every assignment as an atomic move that other
processes may interleave with arbitrarily.  The untimed enumeration
admits schedules the timed engine's re-arm discipline excludes, so it
is only sound for variants whose selections never read wires written
by a concurrently running process; it refuses the rest.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from omutex import kernel, servers, sim
from omutex.clients import ChannelRole, ChannelSpec
from omutex.hse.compiler import CompiledProcessSet, compile_process_set
from omutex.hse.engine import Engine
from omutex.servers import ServerBuild
from omutex.timing import TimeInterval


class ViolationKind(enum.Enum):
    MUTEX_OVERLAP = "mutex_overlap"
    HANDSHAKE_ORDER = "handshake_order"
    DEADLOCK = "deadlock"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    time: int
    subjects: Tuple[str, ...]
    detail: str

    def __str__(self):
        return "%s t=%d %s: %s" % (
            self.kind.value, self.time, ",".join(self.subjects), self.detail)


@dataclass(frozen=True)
class Metrics:
    """Performance figures for one trace.

    total_idle_while_pending: ticks during which no client is using the
    resource but at least one request wire is high.  ack_overlap_time:
    ticks during which two acknowledges are high at once; those spans
    are exactly where an opportunistic server runs ahead of a baseline
    one.  opportunistic_grants counts acknowledges rising while the
    other client's actual request and acknowledge are both still high.
    """

    total_idle_while_pending: int
    ack_overlap_time: int
    handshakes_completed: Dict[str, int]
    opportunistic_grants: int

    def __post_init__(self):
        if self.total_idle_while_pending < 0 or self.ack_overlap_time < 0 \
                or self.opportunistic_grants < 0:
            raise ValueError("metrics cannot be negative")


# ---------------------------------------------------------------------------
# Trace checkers

def check_mutex(trace: sim.Trace) -> List[Violation]:
    """One MutexOverlap per pair of usage intervals that intersect.

    Intervals are half-open: [0,10) and [10,20) do not overlap.
    """
    ivs = []
    for client, spans in trace.usage.items():
        for (s, e) in spans:
            ivs.append((s, e, client))
    ivs.sort()
    out = []
    # Sweep over starts; everything started earlier and not yet ended
    # overlaps the current interval.
    live: List[Tuple[int, int, str]] = []   # (end, start, client)
    for (s, e, client) in ivs:
        live = [x for x in live if x[0] > s]
        for (e2, s2, c2) in live:
            lo = s if s > s2 else s2
            hi = e if e < e2 else e2
            out.append(Violation(
                ViolationKind.MUTEX_OVERLAP, lo,
                tuple(sorted((client, c2))),
                "usage [%d,%d) of %s intersects [%d,%d) of %s on [%d,%d)"
                % (s, e, client, s2, e2, c2, lo, hi)))
        live.append((e, s, client))
    out.sort(key=lambda v: (v.time, v.subjects))
    return out


_PHASE_NAMES = ("request rise", "acknowledge rise",
                "request fall", "acknowledge fall")


def check_handshake(trace: sim.Trace, spec: ChannelSpec) -> List[Violation]:
    """Four-phase conformance for one channel.

    The cycle is r up, a up, r down, a down; early/actual channels are
    checked on the actual request wire and must additionally lower the
    early wire strictly before the actual one in every cycle.
    """
    if spec.role is ChannelRole.EARLY_ACTUAL:
        req = spec.request_actual
        early = spec.request_early
    else:
        req = spec.request
        early = None
    ack = spec.ack
    out = []
    cycle = ((req, 1), (ack, 1), (req, 0), (ack, 0))
    phase = 0
    early_val = 0
    for (t, n, v) in trace.transitions:
        if n == early:
            early_val = v
            continue
        if n != req and n != ack:
            continue
        if (n, v) == cycle[phase]:
            if early is not None and n == req and v == 0 and early_val:
                out.append(Violation(
                    ViolationKind.HANDSHAKE_ORDER, t, (spec.name,),
                    "actual release %s fell while early wire %s still high"
                    % (req, early)))
            phase = (phase + 1) % 4
            continue
        out.append(Violation(
            ViolationKind.HANDSHAKE_ORDER, t, (spec.name,),
            "saw %s->%d but expected %s" % (n, v, _PHASE_NAMES[phase])))
        # Resync on the observed event so one slip does not cascade.
        for i, step in enumerate(cycle):
            if step == (n, v):
                phase = (i + 1) % 4
                break
    return out


def check_deadlock(trace: sim.Trace) -> List[Violation]:
    if not trace.deadlocked:
        return []
    return [Violation(ViolationKind.DEADLOCK, trace.deadlock_time, (),
                      "event queue drained with a process stuck mid-cycle")]


# ---------------------------------------------------------------------------
# Metrics

def _is_request_wire(name: str) -> bool:
    return name.endswith(".r") or name.endswith(".r_a") \
        or name.endswith(".r_e")


def _is_actual_request(name: str) -> bool:
    return name.endswith(".r") or name.endswith(".r_a")


def metrics(trace: sim.Trace, horizon: Optional[int] = None) -> Metrics:
    """Measure idle-while-pending and acknowledge overlap on [0, H).

    H defaults to the trace horizon; traces recorded without one are
    measured up to their last event.
    """
    if horizon is None:
        horizon = trace.horizon
    if horizon <= 0:
        last = 0
        for (t, _, _) in trace.transitions:
            if t > last:
                last = t
        for spans in trace.usage.values():
            for (_, e) in spans:
                if e > last:
                    last = e
        horizon = last

    # Step-function deltas at breakpoints; all tracked wires start low.
    deltas: Dict[int, List[int]] = {}

    def bump(t, slot, d):
        if 0 <= t < horizon:
            deltas.setdefault(t, [0, 0, 0])[slot] += d

    values: Dict[str, int] = {}
    ack_values: Dict[str, int] = {}
    handshakes: Dict[str, int] = {}
    opportunistic = 0
    channels = set()
    for (t, n, v) in trace.transitions:
        if "." in n:
            channels.add(n.split(".", 1)[0])
    for (t, n, v) in trace.transitions:
        if _is_request_wire(n):
            bump(t, 0, 1 if v else -1)
        if n.endswith(".a"):
            bump(t, 2, 1 if v else -1)
            name = n[:-2]
            if v == 0:
                handshakes[name] = handshakes.get(name, 0) + 1
            else:
                for other in channels:
                    if other == name:
                        continue
                    if ack_values.get(other + ".a", 0) and (
                            values.get(other + ".r_a", 0)
                            or values.get(other + ".r", 0)):
                        opportunistic += 1
            ack_values[n] = v
        if _is_actual_request(n):
            values[n] = v
    for spans in trace.usage.values():
        for (s, e) in spans:
            # A span crossing the horizon keeps busy high to the end;
            # its fall bump lands out of range and is dropped.
            bump(s, 1, 1)
            bump(e, 1, -1)

    idle_pending = 0
    ack_overlap = 0
    req = busy = acks = 0
    cur = 0
    for t in sorted(deltas):
        span = t - cur
        if span > 0:
            if req > 0 and busy == 0:
                idle_pending += span
            if acks >= 2:
                ack_overlap += span
        d = deltas[t]
        req += d[0]
        busy += d[1]
        acks += d[2]
        cur = t
    span = horizon - cur
    if span > 0:
        if req > 0 and busy == 0:
            idle_pending += span
        if acks >= 2:
            ack_overlap += span
    return Metrics(
        total_idle_while_pending=idle_pending,
        ack_overlap_time=ack_overlap,
        handshakes_completed=handshakes,
        opportunistic_grants=opportunistic,
    )


# ---------------------------------------------------------------------------
# Exhaustive timed exploration

DEFAULT_EXPLORE_HORIZON = 10 ** 9


@dataclass(frozen=True)
class ExploreResult:
    orderings: frozenset
    violations: Tuple[Violation, ...]
    runs: int
    partial: bool
    depth: int


class CapExceeded(RuntimeError):
    """Exploration hit its run cap; carries the partial result."""

    def __init__(self, result: ExploreResult):
        self.result = result
        super().__init__("exploration cap exceeded after %d runs"
                         % result.runs)


class _Replay:
    """Decision source: scripted prefix, then first option everywhere."""

    __slots__ = ("prefix", "i")

    def __init__(self, prefix):
        self.prefix = prefix
        self.i = 0

    def choose(self, n):
        i = self.i
        self.i = i + 1
        if i < len(self.prefix):
            pick = self.prefix[i]
            if not 0 <= pick < n:
                raise ValueError("replayed pick %d out of range %d"
                                 % (pick, n))
            return pick
        return 0


def _compiled_of(ps) -> CompiledProcessSet:
    if isinstance(ps, CompiledProcessSet):
        return ps
    if isinstance(ps, ServerBuild):
        return compile_process_set(ps.process_set,
                                   proc_names=ps.proc_names,
                                   commit_invariants=ps.commit_invariants)
    return compile_process_set(ps)


def explore(ps, depth: int, *,
            clients: Sequence = (),
            delays: Optional[sim.DelayPolicy] = None,
            arb_latency=None,
            channels: Sequence[ChannelSpec] = (),
            visible_nodes=None,
            horizon: int = DEFAULT_EXPLORE_HORIZON,
            max_runs: int = 20000,
            max_violations: int = 64,
            on_cap: str = "flag") -> ExploreResult:
    """Enumerate every execution up to `depth` visible transitions.

    Decision points are arbitrated selections with several true guards
    and, under exhaustive endpoint sampling (forced here), every
    non-point delay draw.  Branches are expanded breadth-first by
    replaying a recorded decision prefix and diverging at each later
    decision.  Orderings are the value-change sequences on the visible
    wires (default: every dotted channel wire), truncated to `depth`.

    Accepts a ProcessSet, a CompiledProcessSet, or a ServerBuild.
    on_cap: "flag" returns partial=True, "raise" raises CapExceeded.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    compiled = _compiled_of(ps)
    if depth == 0:
        return ExploreResult(frozenset({()}), (), 0, False, 0)
    if delays is None:
        delays = sim.DelayPolicy()
    delays = sim.DelayPolicy(default=delays.default,
                             overrides=dict(delays.overrides),
                             sampling=sim.Sampling.EXHAUSTIVE_ENDPOINTS)
    if visible_nodes is None:
        visible_nodes = [n for n in compiled.node_names if "." in n]
    vis_set = set(visible_nodes)
    if not channels:
        channels = tuple(c.channel for c in clients)

    queue = deque([()])
    orderings = set()
    violations = []
    seen_viol = set()
    runs = 0
    partial = False

    def note(v):
        if v not in seen_viol and len(violations) < max_violations:
            seen_viol.add(v)
            violations.append(v)

    while queue:
        if runs >= max_runs:
            partial = True
            break
        prefix = queue.popleft()
        runs += 1
        eng = Engine(compiled, horizon=horizon, seed=0, delays=delays,
                     clients=clients, variant="explore",
                     decision_source=_Replay(prefix),
                     visible_nodes=visible_nodes, max_visible=depth,
                     arb_latency=arb_latency)
        while eng.step() is not None:
            pass
        tr = eng.trace()
        ordering = tuple((n, v) for (_, n, v) in tr.transitions
                         if n in vis_set)[:depth]
        orderings.add(ordering)
        for v in check_mutex(tr):
            note(v)
        for ch in channels:
            for v in check_handshake(tr, ch):
                note(v)
        for v in check_deadlock(tr):
            note(v)
        log = eng.choice_log
        for i in range(len(prefix), len(log)):
            n_i = log[i][0]
            base = tuple(pick for (_, pick) in log[:i])
            for alt in range(1, n_i):
                queue.append(base + (alt,))

    result = ExploreResult(frozenset(orderings), tuple(violations),
                           runs, partial, depth)
    if partial and on_cap == "raise":
        raise CapExceeded(result)
    return result


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of trace_equiv_report.

    oracle is "interleaving" when the sets came from complete
    enumeration of untimed schedules, "timed-endpoints" when they came
    from the timed engine.  runs_a/runs_b count engine executions for
    the timed oracle and distinct orderings for the interleaving one.
    """
    equal: bool
    depth: int
    only_a: frozenset
    only_b: frozenset
    runs_a: int
    runs_b: int
    oracle: str = "timed-endpoints"


# Arbitration commit latencies explored by the timed oracle.  All other
# wires run at unit delay there, so branching happens only at genuine
# arbitration: which guard commits, and how long the arbitration stays
# open first.
EQUIV_ARB_LATENCY = TimeInterval(0, 4)


def trace_equiv_report(variant_a, variant_b, depth: int, *,
                       opportunism_enabled: bool = True,
                       delays: Optional[sim.DelayPolicy] = None,
                       arb_latency=None,
                       max_runs: int = 20000) -> EquivalenceReport:
    """Ordering-set comparison of two server variants.

    Each variant is closed with one canonical environment cycle per
    client; equivalence is equality of the channel-wire ordering sets
    (internal variables hidden).  Raises ValueError when the variants
    expose different channel wires.

    Two oracles, picked per pair.  With neither delay knob given, and
    both closed systems admitting it, orderings are enumerated under
    pure interleaving semantics: every schedule of atomic assignments
    and arbitrated commits, no delay model at all.  That is the right
    notion for delay-insensitive rewrites and is complete at the
    requested depth.  A variant whose correctness hangs on a timing
    assumption is refused by the interleaving explorer (its
    deterministic selections read wires that other processes drive, so
    unrestricted schedules would include the stale commits the
    assumption rules out); such pairs fall back to the timed engine at
    unit delays, branching exhaustively over arbitration resolutions
    and commit latencies up to EQUIV_ARB_LATENCY.  Passing delays or
    arb_latency forces the timed oracle with those values; timed runs
    that outgrow max_runs raise CapExceeded.
    """
    a = servers.variant_by_name(variant_a) \
        if isinstance(variant_a, str) else variant_a
    b = servers.variant_by_name(variant_b) \
        if isinstance(variant_b, str) else variant_b
    wires_a = servers.channel_wires(a)
    wires_b = servers.channel_wires(b)
    if wires_a != wires_b:
        raise ValueError(
            "variants expose different channel wires: %s vs %s"
            % (sorted(wires_a), sorted(wires_b)))
    build_a = servers.closed_build(a, opportunism_enabled)
    build_b = servers.closed_build(b, opportunism_enabled)
    if delays is None and arb_latency is None:
        try:
            oa = untimed_orderings(build_a, depth,
                                   visible_nodes=sorted(wires_a))
            ob = untimed_orderings(build_b, depth,
                                   visible_nodes=sorted(wires_b))
        except UntimedUnsupported:
            pass
        else:
            return EquivalenceReport(
                equal=oa == ob,
                depth=depth,
                only_a=frozenset(oa - ob),
                only_b=frozenset(ob - oa),
                runs_a=len(oa),
                runs_b=len(ob),
                oracle="interleaving",
            )
    if delays is None:
        delays = sim.DelayPolicy(default=TimeInterval(1, 1))
    if arb_latency is None:
        arb_latency = EQUIV_ARB_LATENCY
    ra = explore(build_a, depth,
                 delays=delays, arb_latency=arb_latency,
                 visible_nodes=sorted(wires_a),
                 max_runs=max_runs, on_cap="raise")
    rb = explore(build_b, depth,
                 delays=delays, arb_latency=arb_latency,
                 visible_nodes=sorted(wires_b),
                 max_runs=max_runs, on_cap="raise")
    return EquivalenceReport(
        equal=ra.orderings == rb.orderings,
        depth=depth,
        only_a=frozenset(ra.orderings - rb.orderings),
        only_b=frozenset(rb.orderings - ra.orderings),
        runs_a=ra.runs,
        runs_b=rb.runs,
        oracle="timed-endpoints",
    )


def trace_equiv(variant_a, variant_b, depth: int, **kw) -> bool:
    return trace_equiv_report(variant_a, variant_b, depth, **kw).equal


# ---------------------------------------------------------------------------
# Untimed interleaving oracle
#
# Independent of the timed engine: states are (per-process pc, node
# values); a move is one atomic assignment or one arbitrated commit;
# everything else (jumps, satisfied waits, single-true deterministic
# selections) advances eagerly inside normalization.  Arbiter latency
# needs no explicit move: deferring a commit is the same as scheduling
# other processes first.  Deterministic selections are advanced eagerly,
# which is only sound when no other process writes their guard wires;
# processes violating that (or using in-process parallelism) are
# refused rather than explored unsoundly.

_K_ASSIGN = kernel.OP_ASSIGN
_K_WAIT = kernel.OP_WAIT
_K_SEL = kernel.OP_SEL
_K_JUMP = kernel.OP_JUMP
_K_FORK = kernel.OP_FORK


class UntimedUnsupported(NotImplementedError):
    pass


def _untimed_validate(c: CompiledProcessSet):
    writers = []
    for prog in c.programs:
        w = set()
        for instr in prog:
            if instr is None:
                continue
            if instr[0] == _K_ASSIGN:
                w.add(instr[1])
            if instr[0] == _K_FORK:
                raise UntimedUnsupported(
                    "in-process parallelism is not explored untimed")
        writers.append(w)
    for pi, prog in enumerate(c.programs):
        others = set()
        for qi, w in enumerate(writers):
            if qi != pi:
                others |= w
        for instr in prog:
            if instr is None or instr[0] != _K_SEL or instr[1]:
                continue
            sup = set()
            for g in instr[2]:
                sup.update(c.guards_support[g])
            clash = sup & others
            if clash:
                names = sorted(c.node_names[n] for n in clash)
                raise UntimedUnsupported(
                    "process %s has a deterministic selection reading "
                    "wires written elsewhere (%s); eager evaluation "
                    "would be unsound" % (c.proc_names[pi],
                                          ", ".join(names)))

def _untimed_normalize(c: CompiledProcessSet, pcs, values):
    pcs = list(pcs)
    values = list(values)
    guard = 0
    changed = True
    while changed:
        changed = False
        guard += 1
        if guard > 100000:
            raise RuntimeError("untimed normalization did not terminate")
        for ti in range(len(pcs)):
            prog = c.programs[ti]
            pc = pcs[ti]
            instr = prog[pc]
            op = instr[0]
            if op == _K_JUMP:
                pcs[ti] = instr[1]
                changed = True
            elif op == _K_WAIT:
                if kernel.eval_rpn(c.guards_rpn[instr[1]], values):
                    pcs[ti] = instr[2]
                    changed = True
            elif op == _K_SEL and not instr[1]:
                trues = [i for i, g in enumerate(instr[2])
                         if kernel.eval_rpn(c.guards_rpn[g], values)]
                if len(trues) > 1:
                    names = [c.guard_names[instr[2][i]] for i in trues]
                    raise kernel.StabilityError(-1, names)
                if len(trues) == 1:
                    inv = instr[5]
                    if inv >= 0 and not kernel.eval_rpn(
                            c.guards_rpn[inv], values):
                        raise kernel.InvariantError(
                            -1, c.invariant_labels[inv])
                    pcs[ti] = instr[3][trues[0]]
                    changed = True
            elif op == _K_ASSIGN and values[instr[1]] == instr[2]:
                # Vacuous: no observable effect, advance silently.
                pcs[ti] = instr[3]
                changed = True
    return tuple(pcs), tuple(values)


def _untimed_moves(c: CompiledProcessSet, pcs, values):
    """Moves from a normalized state: (ti, kind, payload)."""
    out = []
    for ti in range(len(pcs)):
        instr = c.programs[ti][pcs[ti]]
        op = instr[0]
        if op == _K_ASSIGN:
            out.append((ti, "assign", None))
        elif op == _K_SEL and instr[1]:
            for i, g in enumerate(instr[2]):
                if kernel.eval_rpn(c.guards_rpn[g], values):
                    out.append((ti, "commit", i))
    return out


def _untimed_apply(c: CompiledProcessSet, pcs, values, move, visible):
    ti, kind, payload = move
    pcs = list(pcs)
    values = list(values)
    instr = c.programs[ti][pcs[ti]]
    flip = None
    if kind == "assign":
        node, val = instr[1], instr[2]
        values[node] = val
        pcs[ti] = instr[3]
        if visible[node]:
            flip = (c.node_names[node], val)
    else:
        inv = instr[5]
        if inv >= 0 and not kernel.eval_rpn(c.guards_rpn[inv], values):
            raise kernel.InvariantError(-1, c.invariant_labels[inv])
        pcs[ti] = instr[3][payload]
    return tuple(pcs), tuple(values), flip


def untimed_orderings(ps, depth: int, *,
                      visible_nodes=None,
                      max_states: int = 2_000_000) -> frozenset:
    """Visible orderings of all raw interleavings, to `depth` flips.

    Sequences shorter than `depth` end in states with no moves left.
    Raises UntimedUnsupported for process sets it cannot soundly
    enumerate and CapExceeded past `max_states` memo entries.
    """
    c = _compiled_of(ps)
    if visible_nodes is None:
        visible_nodes = [n for n in c.node_names if "." in n]
    vis_names = set(visible_nodes)
    visible = [1 if n in vis_names else 0 for n in c.node_names]
    _untimed_validate(c)

    memo = {}
    stack = set()

    def lang(pcs, values, k):
        pcs, values = _untimed_normalize(c, pcs, values)
        key = (pcs, values, k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if key in stack:
            return frozenset()
        if len(memo) > max_states:
            raise CapExceeded(ExploreResult(
                frozenset(), (), len(memo), True, depth))
        if k == 0:
            memo[key] = frozenset({()})
            return memo[key]
        moves = _untimed_moves(c, pcs, values)
        if not moves:
            memo[key] = frozenset({()})
            return memo[key]
        stack.add(key)
        out = set()
        for m in moves:
            p2, v2, flip = _untimed_apply(c, pcs, values, m, visible)
            if flip is None:
                out |= lang(p2, v2, k)
            else:
                for o in lang(p2, v2, k - 1):
                    out.add((flip,) + o)
        stack.discard(key)
        if not out:
            # Every continuation cycled without visible progress.
            out.add(())
        memo[key] = frozenset(out)
        return memo[key]

    pcs0 = tuple(0 for _ in c.programs)
    values0 = tuple(c.init_values)
    return lang(pcs0, values0, depth)


def untimed_equiv(variant_a, variant_b, depth: int, *,
                  opportunism_enabled: bool = True,
                  max_states: int = 2_000_000) -> bool:
    """Untimed counterpart of trace_equiv, for the variants it supports."""
    a = servers.variant_by_name(variant_a) \
        if isinstance(variant_a, str) else variant_a
    b = servers.variant_by_name(variant_b) \
        if isinstance(variant_b, str) else variant_b
    wires = servers.channel_wires(a)
    if wires != servers.channel_wires(b):
        raise ValueError("variants expose different channel wires")
    oa = untimed_orderings(servers.closed_build(a, opportunism_enabled),
                           depth, visible_nodes=sorted(wires),
                           max_states=max_states)
    ob = untimed_orderings(servers.closed_build(b, opportunism_enabled),
                           depth, visible_nodes=sorted(wires),
                           max_states=max_states)
    return oa == ob
