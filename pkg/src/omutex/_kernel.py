# cython: language_level=3
"""Hot simulation core shared by both backends.

This module is written in Cython "pure Python" mode: the build copies
it to _kernel_c.py and compiles that twin, while this file stays
importable as ordinary Python.  omutex.kernel selects the backend at
import time.  Everything here works on integer node indices and plain
tuples; name resolution, AST handling, and file formats live in the
wrapper modules.

Contents: the splitmix64 generator, RPN guard evaluation, the timed
interpreter for compiled guarded-command programs plus generator-based
clients (HseEngine), and the production-rule gate simulator with
arbiter primitives (PrsEngine).
"""

import heapq

try:
    import cython
    COMPILED = cython.compiled
except ImportError:
    COMPILED = False

MASK64 = 0xFFFFFFFFFFFFFFFF

# ---------------------------------------------------------------------------
# splitmix64

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def mix64(x):
    """One splitmix64 output step applied to x (also used for seeding)."""
    z = (x + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class Stream:
    """splitmix64 stream: state advances by the golden-ratio increment,
    each output is the mixed state.  Draws are independent of any other
    stream, which is what keeps client timelines identical across server
    variants at a fixed seed."""

    __slots__ = ("state",)

    def __init__(self, seed):
        self.state = seed & MASK64

    def next_u64(self):
        self.state = (self.state + _GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def randbelow(self, n):
        # Rejection sampling; unbiased for any n >= 1.
        if n <= 1:
            return 0
        limit = MASK64 - (MASK64 % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo, hi):
        """Uniform integer in [lo, hi], inclusive; no draw when lo == hi."""
        if lo == hi:
            return lo
        return lo + self.randbelow(hi - lo + 1)


def derive_stream_seed(seed, name):
    """Stable per-process stream seed from the run seed and a name.

    FNV-1a over the UTF-8 name, folded into the seed through mix64.
    """
    h = 0xCBF29CE484222325
    for b in name.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return mix64(mix64(seed) ^ h)


# ---------------------------------------------------------------------------
# Guard evaluation
#
# Guards are postfix programs over node values: opcode >= 0 pushes
# values[opcode]; -1 NOT, -2 AND, -3 OR, -4 TRUE, -5 FALSE.

RPN_NOT = -1
RPN_AND = -2
RPN_OR = -3
RPN_TRUE = -4
RPN_FALSE = -5


def eval_rpn(code, values):
    # Explicit stack pointer: the compiled build indexes without
    # negative-offset support.
    stack = [0] * 16
    sp = 0
    for op in code:
        if op >= 0:
            if sp == len(stack):
                stack.append(0)
            stack[sp] = values[op]
            sp += 1
        elif op == RPN_NOT:
            stack[sp - 1] = 1 - stack[sp - 1]
        elif op == RPN_AND:
            sp -= 1
            if stack[sp] == 0:
                stack[sp - 1] = 0
        elif op == RPN_OR:
            sp -= 1
            if stack[sp] == 1:
                stack[sp - 1] = 1
        else:
            if sp == len(stack):
                stack.append(0)
            stack[sp] = 1 if op == RPN_TRUE else 0
            sp += 1
    return stack[sp - 1]


# ---------------------------------------------------------------------------
# Errors

class KernelError(Exception):
    pass


class StabilityError(KernelError):
    """More than one guard of a deterministic selection is true."""

    def __init__(self, time, names):
        self.time = time
        self.guard_names = names
        super().__init__(
            "stability violation at t=%d: guards %s simultaneously true"
            % (time, ", ".join(names)))


class InterferenceError(KernelError):
    """A node is driven toward both values at once."""

    def __init__(self, time, node_name):
        self.time = time
        self.node = node_name
        super().__init__(
            "interference on %s at t=%d: opposing drivers" % (node_name, time))


class InvariantError(KernelError):
    """A selection-commit invariant failed."""

    def __init__(self, time, label):
        self.time = time
        self.label = label
        super().__init__("invariant %r false at commit, t=%d" % (label, time))


# ---------------------------------------------------------------------------
# Sampling

MODE_UNIFORM = 0
MODE_LOW = 1
MODE_HIGH = 2
MODE_EXHAUSTIVE = 3


class Sampler:
    """Delay sampler bound to one process stream.

    In exhaustive mode every non-point draw becomes a binary decision
    (interval low or high endpoint) routed through the engine's decision
    source, so a replaying explorer can enumerate them.
    """

    __slots__ = ("stream", "engine")

    def __init__(self, stream, engine):
        self.stream = stream
        self.engine = engine

    def draw(self, lo, hi):
        if lo == hi:
            return lo
        mode = self.engine.sample_mode
        if mode == MODE_UNIFORM:
            return self.stream.randint(lo, hi)
        if mode == MODE_LOW:
            return lo
        if mode == MODE_HIGH:
            return hi
        return lo if self.engine.decide(2, self.stream) == 0 else hi


# ---------------------------------------------------------------------------
# Instruction opcodes (compiled guarded-command programs)

OP_ASSIGN = 0   # (0, node, val, next_pc)
OP_WAIT = 1     # (1, guard_id, next_pc)
OP_SEL = 2      # (2, nondet, guard_ids, target_pcs, exit_pc, inv_id)
SETTLE_TICKS = 1    # selection re-arm time on arrival
OP_JUMP = 3     # (3, pc)
OP_FORK = 4     # (4, child_pcs, join_id, cont_pc)
OP_JOIN = 5     # (5, join_id)
OP_HALT = 6     # (6,)

# Thread status values
ST_READY = 0
ST_PARKED = 1      # waiting for a scheduled event (assign delay, client delay)
ST_BLOCKED = 2     # waiting for a guard / node value
ST_DORMANT = 3     # fork parent waiting on join
ST_DEAD = 4

# Event kinds
EV_FLIP = 0
EV_RESUME = 1

# Client command tags (yielded by client generators)
C_EMIT = 0        # (C_EMIT, node, val, abs_time)
C_DELAY = 1       # (C_DELAY, ticks)
C_DELAY_UNTIL = 2  # (C_DELAY_UNTIL, abs_time)
C_WAIT = 3        # (C_WAIT, node, val)
C_USAGE = 4       # (C_USAGE, name, start, end)


class HseEngine:
    """Timed interpreter over compiled processes and client generators.

    Assignments take a per-node sampled delay; wakeups cascade in thread
    order at a fixed timestamp; queue ties break in schedule order.  The
    horizon is half-open: events at t >= horizon do not run.
    """

    def __init__(self, n_nodes, node_names, init_values,
                 programs, idle_pcs,
                 guards_rpn, guards_support, guard_names,
                 node_lo, node_hi,
                 horizon, seed,
                 proc_names,
                 decision_source=None,
                 sample_mode=MODE_UNIFORM,
                 visible_nodes=None,
                 max_visible=-1,
                 stimuli=(),
                 invariant_labels=(),
                 arb_lo=0, arb_hi=0):
        self.n_nodes = n_nodes
        self.node_names = list(node_names)
        self.values = list(init_values)
        self.programs = programs
        self.idle_pcs = idle_pcs
        self.guards_rpn = guards_rpn
        self.guards_support = guards_support
        self.guard_names = guard_names
        self.node_lo = node_lo
        self.node_hi = node_hi
        self.horizon = horizon
        self.sample_mode = sample_mode
        self.decision_source = decision_source
        self.invariant_labels = invariant_labels
        # Arbitrated-selection commit latency window: with a non-point
        # window, a selection that sees a true guard may wait before
        # committing, letting later contenders join the arbitration.
        self.arb_lo = arb_lo
        self.arb_hi = arb_hi

        self.now = 0
        self.seq = 0
        self.heap = []
        self.transitions = []
        self.usages = []
        self.choice_log = []
        self.pending = [-1] * n_nodes
        self.watchers = [set() for _ in range(n_nodes)]

        self.deadlocked = False
        self.deadlock_time = -1
        self.hit_horizon = False
        self.stopped_visible = False
        self._started = False

        self.visible = [0] * n_nodes
        if visible_nodes is not None:
            for i in visible_nodes:
                self.visible[i] = 1
        self.max_visible = max_visible
        self.visible_count = 0

        # Threads: one per process; forks add more.
        self.thr_proc = []
        self.thr_pc = []
        self.thr_status = []
        self.thr_guard = []      # guard id while blocked on WAIT/SEL
        self.thr_client = []     # generator or None
        self.thr_cwait = []      # (node, val) while a client is blocked
        self.thr_cprimed = []    # generator has been started
        self.thr_settled = []    # selection at current pc has re-armed
        self.thr_arbprimed = []  # arbitration latency already spent
        self.streams = []
        self.samplers = []
        self.join_count = {}
        self.join_parent = {}
        self._ready = []

        for pi in range(len(programs)):
            s = Stream(derive_stream_seed(seed, proc_names[pi]))
            self.streams.append(s)
            self.samplers.append(Sampler(s, self))
            self._new_thread(pi, 0, None)

        for (t, node, val) in stimuli:
            self._schedule(t, EV_FLIP, node, val, -1)

    # -- construction helpers -------------------------------------------

    def _new_thread(self, proc, pc, client):
        tid = len(self.thr_pc)
        self.thr_proc.append(proc)
        self.thr_pc.append(pc)
        self.thr_status.append(ST_READY)
        self.thr_guard.append(-1)
        self.thr_client.append(client)
        self.thr_cwait.append(None)
        self.thr_cprimed.append(False)
        self.thr_settled.append(False)
        self.thr_arbprimed.append(False)
        heapq.heappush(self._ready, tid)
        return tid

    def add_client_seeded(self, seed, name, factory):
        """Register a client: factory(sampler) -> command generator."""
        s = Stream(derive_stream_seed(seed, name))
        self.streams.append(s)
        sampler = Sampler(s, self)
        self.samplers.append(sampler)
        gen = factory(sampler)
        self._new_thread(-1, -1, gen)

    # -- scheduling ------------------------------------------------------

    def _schedule(self, t, kind, a, b, c):
        self.seq += 1
        heapq.heappush(self.heap, (t, self.seq, kind, a, b, c))

    def decide(self, n, stream):
        """Resolve an n-way arbitrated choice; logged for replay."""
        ds = self.decision_source
        if ds is not None:
            pick = ds.choose(n)
        else:
            pick = stream.randbelow(n)
        self.choice_log.append((n, pick))
        return pick

    # -- blocking / waking -----------------------------------------------

    def _watch(self, tid, support):
        for n in support:
            self.watchers[n].add(tid)

    def _unwatch(self, tid):
        for w in self.watchers:
            w.discard(tid)

    def _make_ready(self, tid):
        self.thr_status[tid] = ST_READY
        heapq.heappush(self._ready, tid)

    def _wake_on_flip(self, node):
        woken = []
        for tid in self.watchers[node]:
            st = self.thr_status[tid]
            if st != ST_BLOCKED:
                continue
            if self.thr_client[tid] is not None:
                wn, wv = self.thr_cwait[tid]
                if self.values[wn] == wv:
                    woken.append(tid)
            else:
                instr = self.programs[self.thr_proc[tid]][self.thr_pc[tid]]
                if instr[0] == OP_WAIT:
                    if eval_rpn(self.guards_rpn[instr[1]], self.values):
                        woken.append(tid)
                else:  # OP_SEL
                    for g in instr[2]:
                        if eval_rpn(self.guards_rpn[g], self.values):
                            woken.append(tid)
                            break
        for tid in woken:
            self._unwatch(tid)
            self._make_ready(tid)

    # -- execution ---------------------------------------------------------

    def _do_assign(self, tid, node, val):
        proc = self.thr_proc[tid]
        d = self.samplers[proc].draw(self.node_lo[node], self.node_hi[node])
        pend = self.pending[node]
        if pend != -1 and pend != val:
            raise InterferenceError(self.now, self.node_names[node])
        if self.values[node] == val and pend == -1:
            # Vacuous: takes its delay, flips nothing.
            self._schedule(self.now + d, EV_RESUME, tid, 0, 0)
        elif pend == val:
            # Someone else is already driving the same value.
            self._schedule(self.now + d, EV_RESUME, tid, 0, 0)
        else:
            self.pending[node] = val
            self._schedule(self.now + d, EV_FLIP, node, val, tid)
        self.thr_status[tid] = ST_PARKED

    def _emit(self, node, val, t):
        if t < self.now:
            raise KernelError(
                "client emit for %s scheduled in the past (t=%d < now=%d)"
                % (self.node_names[node], t, self.now))
        pend = self.pending[node]
        if pend != -1 and pend != val:
            raise InterferenceError(self.now, self.node_names[node])
        self.pending[node] = val
        self._schedule(t, EV_FLIP, node, val, -1)

    def _run_client(self, tid):
        gen = self.thr_client[tid]
        while True:
            try:
                if self.thr_cprimed[tid]:
                    cmd = gen.send(self.now)
                else:
                    self.thr_cprimed[tid] = True
                    cmd = gen.send(None)
            except StopIteration:
                self.thr_status[tid] = ST_DEAD
                return
            tag = cmd[0]
            if tag == C_EMIT:
                self._emit(cmd[1], cmd[2], cmd[3])
            elif tag == C_USAGE:
                self.usages.append((cmd[1], cmd[2], cmd[3]))
            elif tag == C_DELAY:
                self._schedule(self.now + cmd[1], EV_RESUME, tid, 0, 0)
                self.thr_status[tid] = ST_PARKED
                return
            elif tag == C_DELAY_UNTIL:
                t = cmd[1] if cmd[1] > self.now else self.now
                self._schedule(t, EV_RESUME, tid, 0, 0)
                self.thr_status[tid] = ST_PARKED
                return
            else:  # C_WAIT
                node = cmd[1]
                val = cmd[2]
                if self.values[node] == val:
                    continue
                self.thr_cwait[tid] = (node, val)
                self.thr_status[tid] = ST_BLOCKED
                self._watch(tid, (node,))
                return

    def _run_thread(self, tid):
        if self.thr_client[tid] is not None:
            self._run_client(tid)
            return
        prog = self.programs[self.thr_proc[tid]]
        pc = self.thr_pc[tid]
        values = self.values
        while True:
            instr = prog[pc]
            op = instr[0]
            if op == OP_ASSIGN:
                self.thr_pc[tid] = instr[3]
                self._do_assign(tid, instr[1], instr[2])
                return
            elif op == OP_WAIT:
                if eval_rpn(self.guards_rpn[instr[1]], values):
                    pc = instr[2]
                else:
                    self.thr_pc[tid] = pc
                    self.thr_status[tid] = ST_BLOCKED
                    self._watch(tid, self.guards_support[instr[1]])
                    return
            elif op == OP_SEL:
                # Arriving at a selection costs one re-arm tick before the
                # first guard evaluation (wakes from blocking stay prompt).
                # This gives a concurrently withdrawn arbiter grant time to
                # fall, so a selection never commits on a grant its own
                # just-completed branch already invalidated, provided
                # withdrawal delays stay within the re-arm time.  Inflate
                # the grant wires' delays to watch that discipline break.
                if not self.thr_settled[tid]:
                    self.thr_settled[tid] = True
                    self.thr_pc[tid] = pc
                    self.thr_status[tid] = ST_PARKED
                    self._schedule(self.now + SETTLE_TICKS, EV_RESUME,
                                   tid, 0, 0)
                    return
                nondet = instr[1]
                gids = instr[2]
                trues = []
                for i in range(len(gids)):
                    if eval_rpn(self.guards_rpn[gids[i]], values):
                        trues.append(i)
                k = len(trues)
                if k == 0:
                    self.thr_arbprimed[tid] = False
                    if instr[4] >= 0:       # guarded repetition: exit
                        self.thr_settled[tid] = False
                        pc = instr[4]
                        continue
                    self.thr_pc[tid] = pc
                    self.thr_status[tid] = ST_BLOCKED
                    sup = set()
                    for g in gids:
                        sup.update(self.guards_support[g])
                    self._watch(tid, sup)
                    return
                if nondet and not self.thr_arbprimed[tid] \
                        and self.arb_hi > 0:
                    # Commit latency: hold the arbitration open so a
                    # contender arriving within the window still takes
                    # part; guards that fall meanwhile drop out.
                    d = self.samplers[self.thr_proc[tid]].draw(
                        self.arb_lo, self.arb_hi)
                    if d > 0:
                        self.thr_arbprimed[tid] = True
                        self.thr_pc[tid] = pc
                        self.thr_status[tid] = ST_PARKED
                        self._schedule(self.now + d, EV_RESUME, tid, 0, 0)
                        return
                if k == 1:
                    pick = trues[0]
                elif nondet:
                    pick = trues[self.decide(k, self.streams[self.thr_proc[tid]])]
                else:
                    names = [self.guard_names[gids[i]] for i in trues]
                    raise StabilityError(self.now, names)
                self.thr_arbprimed[tid] = False
                inv = instr[5]
                if inv >= 0 and not eval_rpn(self.guards_rpn[inv], values):
                    raise InvariantError(self.now, self.invariant_labels[inv]
                                         if inv < len(self.invariant_labels)
                                         else self.guard_names[inv])
                self.thr_settled[tid] = False
                pc = instr[3][pick]
            elif op == OP_JUMP:
                pc = instr[1]
            elif op == OP_FORK:
                jid = instr[2]
                self.join_count[jid] = len(instr[1])
                self.join_parent[jid] = (tid, instr[3])
                self.thr_status[tid] = ST_DORMANT
                proc = self.thr_proc[tid]
                for cpc in instr[1]:
                    self._new_thread(proc, cpc, None)
                return
            elif op == OP_JOIN:
                jid = instr[1]
                self.thr_status[tid] = ST_DEAD
                self.join_count[jid] -= 1
                if self.join_count[jid] == 0:
                    ptid, cont = self.join_parent[jid]
                    self.thr_pc[ptid] = cont
                    self._make_ready(ptid)
                return
            else:  # OP_HALT
                self.thr_status[tid] = ST_DEAD
                return

    def _advance(self):
        while self._ready:
            tid = heapq.heappop(self._ready)
            if self.thr_status[tid] != ST_READY:
                continue
            self._run_thread(tid)

    # -- main loop ---------------------------------------------------------

    def tick(self):
        """Process one event and its wake cascade.

        Returns True if an event was consumed, False when the run is
        over (queue empty, horizon reached, or visible-count stop).
        """
        if not self._started:
            self._started = True
            self._advance()
        if self.stopped_visible:
            return False
        if not self.heap:
            self._finalize()
            return False
        t = self.heap[0][0]
        if t >= self.horizon:
            self.hit_horizon = True
            return False
        ev = heapq.heappop(self.heap)
        self.now = ev[0]
        kind = ev[2]
        if kind == EV_FLIP:
            node = ev[3]
            val = ev[4]
            tid = ev[5]
            if self.pending[node] == val:
                self.pending[node] = -1
            if self.values[node] != val:
                self.values[node] = val
                self.transitions.append((self.now, node, val))
                if self.visible[node]:
                    self.visible_count += 1
                    if 0 <= self.max_visible <= self.visible_count:
                        self.stopped_visible = True
                self._wake_on_flip(node)
            if tid >= 0:
                self._make_ready(tid)
        else:
            self._make_ready(ev[3])
        self._advance()
        return True

    def run(self, max_events=-1):
        n = 0
        while self.tick():
            n += 1
            if 0 <= max_events <= n:
                break
        return n

    def _finalize(self):
        # Queue drained before the horizon: decide quiescence vs deadlock.
        stuck = False
        for tid in range(len(self.thr_pc)):
            st = self.thr_status[tid]
            if st != ST_BLOCKED:
                continue
            if self.thr_client[tid] is not None:
                stuck = True
                break
            proc = self.thr_proc[tid]
            if self.thr_pc[tid] not in self.idle_pcs[proc]:
                stuck = True
                break
        if stuck:
            self.deadlocked = True
            self.deadlock_time = self.now


# ---------------------------------------------------------------------------
# Production-rule simulation

HZ_INSTABILITY = 0
HZ_INTERFERENCE = 1


class PrsEngine:
    """Event-driven gate-level simulator.

    Rules are (guard, target, value) with per-rule delay bounds; at most
    one rule per (node, direction).  A pending transition whose enabling
    guard falls before it fires is cancelled and recorded as an
    instability hazard; simultaneously enabled opposing rules are an
    interference hazard and both pendings are cancelled.  Arbiter
    primitives resolve input contention with a seeded pick after a
    resolution delay.
    """

    def __init__(self, n_nodes, node_names, init_values,
                 rule_rpn, rule_target, rule_val, rule_lo, rule_hi,
                 trigger_map, up_rule, down_rule,
                 arbiters,
                 horizon, seed,
                 stimuli=(),
                 decision_source=None,
                 sample_mode=MODE_UNIFORM):
        self.n_nodes = n_nodes
        self.node_names = list(node_names)
        self.values = list(init_values)
        self.rule_rpn = rule_rpn
        self.rule_target = rule_target
        self.rule_val = rule_val
        self.rule_lo = rule_lo
        self.rule_hi = rule_hi
        self.trigger_map = trigger_map
        self.up_rule = up_rule
        self.down_rule = down_rule
        self.arbiters = arbiters
        self.horizon = horizon
        self.sample_mode = sample_mode
        self.decision_source = decision_source

        self.stream = Stream(derive_stream_seed(seed, "prs"))
        self.sampler = Sampler(self.stream, self)

        self.now = 0
        self.seq = 0
        self.eid = 0
        self.heap = []
        self.transitions = []
        self.hazards = []
        self.choice_log = []

        self.pend_val = [-1] * n_nodes
        self.pend_eid = [0] * n_nodes
        self.pend_rule = [-1] * n_nodes
        self.pend_since = [0] * n_nodes
        self.interfering = set()

        # Arbiter bookkeeping: node index -> arbiter index for fast updates.
        self.arb_of = {}
        for ai, arb in enumerate(arbiters):
            for n in arb[:4]:
                self.arb_of.setdefault(n, []).append(ai)

        for (t, node, val) in stimuli:
            self.seq += 1
            heapq.heappush(self.heap, (t, self.seq, node, val, -1))

    def decide(self, n, stream):
        ds = self.decision_source
        if ds is not None:
            pick = ds.choose(n)
        else:
            pick = stream.randbelow(n)
        self.choice_log.append((n, pick))
        return pick

    def _schedule(self, t, node, val, rule):
        self.seq += 1
        self.eid += 1
        self.pend_val[node] = val
        self.pend_eid[node] = self.eid
        self.pend_rule[node] = rule
        self.pend_since[node] = self.now
        heapq.heappush(self.heap, (t, self.seq, node, val, self.eid))

    def _cancel(self, node):
        self.pend_val[node] = -1
        self.pend_rule[node] = -1

    def _eval_rule(self, r):
        return eval_rpn(self.rule_rpn[r], self.values)

    def _retrigger(self, r):
        """Re-examine rule r after one of its support nodes flipped."""
        tgt = self.rule_target[r]
        v = self.rule_val[r]
        g = self._eval_rule(r)
        if g:
            opp = self.down_rule[tgt] if v == 1 else self.up_rule[tgt]
            if opp >= 0 and self._eval_rule(opp):
                if tgt not in self.interfering:
                    self.interfering.add(tgt)
                    self.hazards.append(
                        (HZ_INTERFERENCE, tgt, self.now, self.now))
                if self.pend_val[tgt] != -1:
                    self._cancel(tgt)
                return
            self.interfering.discard(tgt)
            if self.values[tgt] != v and self.pend_val[tgt] == -1:
                d = self.sampler.draw(self.rule_lo[r], self.rule_hi[r])
                self._schedule(self.now + d, tgt, v, r)
        else:
            self.interfering.discard(tgt)
            if self.pend_val[tgt] == v and self.pend_rule[tgt] == r:
                self.hazards.append(
                    (HZ_INSTABILITY, tgt, self.now, self.pend_since[tgt]))
                self._cancel(tgt)

    def _arb_update(self, ai):
        arb = self.arbiters[ai]
        in0, in1, out0, out1, res_lo, res_hi, gr_lo, gr_hi = arb
        values = self.values
        # Cancel a granted rise whose input was withdrawn.
        for (i, o) in ((in0, out0), (in1, out1)):
            if self.pend_val[o] == 1 and values[i] == 0:
                self._cancel(o)
        # Releases.
        for (i, o) in ((in0, out0), (in1, out1)):
            if values[o] == 1 and values[i] == 0 and self.pend_val[o] != 0:
                d = self.sampler.draw(gr_lo, gr_hi)
                self._schedule(self.now + d, o, 0, -1)
        # Grants.
        e0 = values[in0] == 1 and values[out0] == 0 and self.pend_val[out0] == -1
        e1 = values[in1] == 1 and values[out1] == 0 and self.pend_val[out1] == -1
        if e0 and e1 and values[out0] == 0 and values[out1] == 0:
            # Contention: metastability resolved by a seeded pick after
            # the resolution delay.
            d = self.sampler.draw(res_lo, res_hi)
            w = self.decide(2, self.stream)
            o = out0 if w == 0 else out1
            self._schedule(self.now + d, o, 1, -1)
        elif e0 and values[out1] == 0 and self.pend_val[out1] != 1:
            d = self.sampler.draw(gr_lo, gr_hi)
            self._schedule(self.now + d, out0, 1, -1)
        elif e1 and values[out0] == 0 and self.pend_val[out0] != 1:
            d = self.sampler.draw(gr_lo, gr_hi)
            self._schedule(self.now + d, out1, 1, -1)

    def run(self):
        while self.heap:
            if self.heap[0][0] >= self.horizon:
                break
            (t, _, node, val, eid) = heapq.heappop(self.heap)
            self.now = t
            if eid == -1:
                # Stimulus: unconditional, no pending bookkeeping.
                if self.values[node] == val:
                    continue
            else:
                if self.pend_eid[node] != eid or self.pend_val[node] != val:
                    continue  # cancelled
                self._cancel(node)
            self.values[node] = val
            self.transitions.append((t, node, val))
            for r in self.trigger_map[node]:
                self._retrigger(r)
            for ai in self.arb_of.get(node, ()):
                self._arb_update(ai)
        return self.transitions
