"""Timed execution of compiled process sets against client generators.

Thin wrapper over the event kernel: resolves node names to indices,
expands the delay policy into per-node bounds, registers clients, and
packages results as traces.
"""

from __future__ import annotations

from omutex import kernel
from omutex import sim
from omutex.clients import ClientProcess, command_factory
from omutex.hse import ast
from omutex.hse.compiler import CompiledProcessSet, compile_process_set
from omutex.timing import TimeInterval


class Engine:
    def __init__(self, compiled: CompiledProcessSet,
                 horizon: int, seed: int,
                 delays: sim.DelayPolicy = None,
                 clients=(),
                 variant: str = "custom",
                 decision_source=None,
                 visible_nodes=None,
                 max_visible: int = -1,
                 stimuli=(),
                 arb_latency=None):
        if delays is None:
            delays = sim.DelayPolicy()
        if arb_latency is None:
            arb_latency = TimeInterval(0, 0)
        arb_latency.require_nonneg("arbitration latency")
        self.compiled = compiled
        self.delays = delays
        self.horizon = horizon
        self.seed = seed
        self.variant = variant
        names = compiled.node_names
        index = compiled.node_index
        node_lo = []
        node_hi = []
        for n in names:
            iv = delays.interval_for(n)
            node_lo.append(iv.lo)
            node_hi.append(iv.hi)

        vis = None
        if visible_nodes is not None:
            vis = tuple(index[n] for n in visible_nodes)
        stim = tuple((t, index[n], v) for (t, n, v) in stimuli)

        self.k = kernel.HseEngine(
            n_nodes=len(names),
            node_names=names,
            init_values=compiled.init_values,
            programs=compiled.programs,
            idle_pcs=compiled.idle_pcs,
            guards_rpn=compiled.guards_rpn,
            guards_support=compiled.guards_support,
            guard_names=compiled.guard_names,
            node_lo=tuple(node_lo),
            node_hi=tuple(node_hi),
            horizon=horizon,
            seed=seed,
            proc_names=compiled.proc_names,
            decision_source=decision_source,
            sample_mode=sim.kernel_mode(delays.sampling),
            visible_nodes=vis,
            max_visible=max_visible,
            stimuli=stim,
            invariant_labels=compiled.invariant_labels,
            arb_lo=arb_latency.lo,
            arb_hi=arb_latency.hi,
        )

        env_ids = set(n for (_, n, _) in stim)
        self.clients = tuple(clients)
        for c in self.clients:
            if not isinstance(c, ClientProcess):
                raise TypeError("clients must be ClientProcess instances")
            for w in c.channel.wires():
                if w not in index:
                    raise KeyError("client wire %r not in process set" % w)
            for w in c.channel.request_wires():
                env_ids.add(index[w])
            self.k.add_client_seeded(seed, c.channel.name,
                                     command_factory(c, index))
        self._env_ids = frozenset(env_ids)
        self._emitted = 0

    # -- stepping ---------------------------------------------------------

    def step(self):
        """Advance one event; return the new transitions as Events.

        Returns None when the run is over.  Transitions on wires driven
        by clients or stimuli are labeled Environment; the rest Process.
        """
        k = self.k
        if not k.tick():
            return None
        out = []
        for (t, n, v) in k.transitions[self._emitted:]:
            src = sim.EventSource.ENVIRONMENT if n in self._env_ids \
                else sim.EventSource.PROCESS
            out.append(sim.Event(t, k.node_names[n], bool(v), src))
        self._emitted = len(k.transitions)
        return out

    def run(self, max_events: int = -1) -> sim.Trace:
        self.k.run(max_events)
        return self.trace()

    def trace(self) -> sim.Trace:
        k = self.k
        transitions = [(t, k.node_names[n], v) for (t, n, v) in k.transitions]
        usage = {}
        for (label, s, e) in k.usages:
            usage.setdefault(label, []).append((s, e))
        for label in usage:
            usage[label].sort()
        return sim.Trace(
            transitions=transitions,
            usage=usage,
            seed=self.seed,
            variant=self.variant,
            horizon=self.horizon,
            deadlocked=k.deadlocked,
            deadlock_time=k.deadlock_time,
        )

    @property
    def deadlocked(self):
        return self.k.deadlocked

    @property
    def choice_log(self):
        return self.k.choice_log

    @property
    def now(self):
        return self.k.now


def run(ps, horizon: int, seed: int,
        delays: sim.DelayPolicy = None,
        clients=(),
        variant: str = "custom",
        proc_names=None,
        commit_invariants=None,
        decision_source=None,
        stimuli=(),
        arb_latency=None) -> sim.Trace:
    """Compile (if needed) and run a process set to a trace."""
    if isinstance(ps, ast.ProcessSet):
        compiled = compile_process_set(ps, proc_names=proc_names,
                                       commit_invariants=commit_invariants)
    else:
        compiled = ps
    eng = Engine(compiled, horizon, seed, delays=delays, clients=clients,
                 variant=variant, decision_source=decision_source,
                 stimuli=stimuli, arb_latency=arb_latency)
    return eng.run()
