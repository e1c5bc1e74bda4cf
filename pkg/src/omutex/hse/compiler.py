"""Lower parsed process sets to the flat instruction form the engine runs.

Each process becomes a tuple of instructions addressed by pc; pc 0 is a
jump to the real entry so threads can always start at 0.  Guards are
deduplicated and compiled to RPN over node indices.
"""

from __future__ import annotations

from omutex import kernel
from omutex.hse import ast


class CompileError(ValueError):
    pass


class CompiledProcessSet:
    """Everything HseEngine needs, minus delays/clients/horizon."""

    def __init__(self, node_names, node_index, init_values,
                 programs, idle_pcs, proc_names,
                 guards_rpn, guards_support, guard_names,
                 invariant_labels):
        self.node_names = node_names
        self.node_index = node_index
        self.init_values = init_values
        self.programs = programs
        self.idle_pcs = idle_pcs
        self.proc_names = proc_names
        self.guards_rpn = guards_rpn
        self.guards_support = guards_support
        self.guard_names = guard_names
        self.invariant_labels = invariant_labels


class _GuardTable:
    def __init__(self, node_index):
        self.node_index = node_index
        self.by_key = {}
        self.rpn = []
        self.support = []
        self.names = []

    def intern(self, g: ast.Guard) -> int:
        if g in self.by_key:
            return self.by_key[g]
        code = []
        self._emit(g, code)
        gid = len(self.rpn)
        self.by_key[g] = gid
        self.rpn.append(tuple(code))
        self.support.append(tuple(sorted(self.node_index[n]
                                         for n in g.nodes())))
        self.names.append(ast.format_guard(g))
        return gid

    def _emit(self, g, code):
        if isinstance(g, ast.Ref):
            code.append(self.node_index[g.name])
        elif isinstance(g, ast.Not):
            self._emit(g.operand, code)
            code.append(kernel.RPN_NOT)
        elif isinstance(g, ast.And):
            self._emit(g.left, code)
            self._emit(g.right, code)
            code.append(kernel.RPN_AND)
        elif isinstance(g, ast.Or):
            self._emit(g.left, code)
            self._emit(g.right, code)
            code.append(kernel.RPN_OR)
        else:
            raise CompileError("cannot compile guard node %r" % (g,))


class _ProcCompiler:
    def __init__(self, node_index, guards, inv_gid):
        self.node_index = node_index
        self.guards = guards
        self.inv_gid = inv_gid
        self.code = [None]          # pc 0 patched to a jump at the end
        self.join_ids = 0

    def emit(self, instr):
        self.code.append(instr)
        return len(self.code) - 1

    def comp(self, s, nxt):
        """Compile s so control falls through to pc `nxt`; returns entry."""
        if isinstance(s, ast.Skip):
            return nxt
        if isinstance(s, ast.Assign):
            return self.emit((kernel.OP_ASSIGN,
                              self.node_index[s.node],
                              1 if s.up else 0, nxt))
        if isinstance(s, ast.Wait):
            return self.emit((kernel.OP_WAIT,
                              self.guards.intern(s.guard), nxt))
        if isinstance(s, ast.Seq):
            entry = nxt
            for item in reversed(s.items):
                entry = self.comp(item, entry)
            return entry
        if isinstance(s, (ast.DetSel, ast.NondetSel)):
            gids = tuple(self.guards.intern(g) for (g, _) in s.branches)
            targets = tuple(self.comp(body, nxt)
                            for (_, body) in s.branches)
            nondet = 1 if isinstance(s, ast.NondetSel) else 0
            return self.emit((kernel.OP_SEL, nondet, gids, targets,
                              -1, self.inv_gid))
        if isinstance(s, ast.Loop):
            jpc = self.emit((kernel.OP_JUMP, -1))
            entry = self.comp(s.body, jpc)
            self.code[jpc] = (kernel.OP_JUMP, entry)
            return entry
        if isinstance(s, ast.Par):
            jid = self.join_ids
            self.join_ids += 1
            jpc = self.emit((kernel.OP_JOIN, jid))
            children = tuple(self.comp(c, jpc) for c in s.items)
            return self.emit((kernel.OP_FORK, children, jid, nxt))
        raise CompileError("cannot compile statement %r" % (s,))

    def finish(self, top):
        hpc = self.emit((kernel.OP_HALT,))
        entry = self.comp(top, hpc)
        self.code[0] = (kernel.OP_JUMP, entry)
        idle = frozenset((entry,)) if isinstance(top, ast.Loop) \
            else frozenset()
        return tuple(self.code), idle


def compile_process_set(ps: ast.ProcessSet,
                        proc_names=None,
                        commit_invariants=None) -> CompiledProcessSet:
    """Lower a process set for the engine.

    proc_names: one name per process (seeds that process's delay
    stream); defaults to p0, p1, ...
    commit_invariants: {proc index: (guard, label)}; the guard is
    re-checked every time that process commits a selection branch.
    """
    names = sorted(ps.nodes())
    node_index = {n: i for (i, n) in enumerate(names)}
    init = ps.initial_map()
    for n, v in init.items():
        if v not in (0, 1):
            raise CompileError("initial value for %s must be 0 or 1" % n)
    init_values = tuple(init.get(n, 0) for n in names)

    if proc_names is None:
        proc_names = tuple("p%d" % i for i in range(len(ps.processes)))
    elif len(proc_names) != len(ps.processes):
        raise CompileError("need %d process names, got %d"
                           % (len(ps.processes), len(proc_names)))

    guards = _GuardTable(node_index)
    inv_by_proc = {}
    if commit_invariants:
        for pi, (g, label) in commit_invariants.items():
            inv_by_proc[pi] = (guards.intern(g), label)

    programs = []
    idle_pcs = []
    for pi, p in enumerate(ps.processes):
        inv_gid = inv_by_proc.get(pi, (-1, None))[0]
        pc = _ProcCompiler(node_index, guards, inv_gid)
        code, idle = pc.finish(p)
        programs.append(code)
        idle_pcs.append(idle)

    labels = [""] * len(guards.rpn)
    for gid, label in inv_by_proc.values():
        labels[gid] = label

    return CompiledProcessSet(
        node_names=tuple(names),
        node_index=node_index,
        init_values=init_values,
        programs=tuple(programs),
        idle_pcs=tuple(idle_pcs),
        proc_names=tuple(proc_names),
        guards_rpn=tuple(guards.rpn),
        guards_support=tuple(guards.support),
        guard_names=tuple(guards.names),
        invariant_labels=tuple(labels),
    )
