"""Shared simulation plumbing: events, delay policies, traces, trace files.

The event queue itself lives in the kernel (omutex._kernel); this
module owns the value types both engines share and the trace file
format.  Trace files are plain text: `# key=value` header lines, one
transition per line as `time,node,0|1`, then `usage,client,start,end`
lines.  Writing is byte-stable for equal traces and reading is a
lossless inverse.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from omutex.kernel import Stream
from omutex.timing import TimeInterval


class EventSource(enum.Enum):
    ENVIRONMENT = "environment"
    PROCESS = "process"
    GATE = "gate"
    ARBITER = "arbiter"


@dataclass(frozen=True)
class Event:
    """One node transition as seen by the engines."""

    time: int
    node: str
    new_value: bool
    source: EventSource = EventSource.PROCESS


class Sampling(enum.Enum):
    UNIFORM_RANDOM = "uniform"
    LOW_ENDPOINT = "low"
    HIGH_ENDPOINT = "high"
    EXHAUSTIVE_ENDPOINTS = "exhaustive"


# Kernel sampling-mode integers, by enum.
_KERNEL_MODE = {
    Sampling.UNIFORM_RANDOM: 0,
    Sampling.LOW_ENDPOINT: 1,
    Sampling.HIGH_ENDPOINT: 2,
    Sampling.EXHAUSTIVE_ENDPOINTS: 3,
}


def kernel_mode(sampling: Sampling) -> int:
    return _KERNEL_MODE[sampling]


def sample_delay(interval: TimeInterval, rng: Stream,
                 sampling: Sampling = Sampling.UNIFORM_RANDOM) -> int:
    """Draw one delay from the interval.

    Point intervals never consume randomness.  EXHAUSTIVE_ENDPOINTS is
    resolved inside the engines (each non-point draw becomes a decision
    an explorer can enumerate) and is rejected here.
    """
    if sampling is Sampling.UNIFORM_RANDOM:
        return rng.randint(interval.lo, interval.hi)
    if sampling is Sampling.LOW_ENDPOINT:
        return interval.lo
    if sampling is Sampling.HIGH_ENDPOINT:
        return interval.hi
    raise ValueError("exhaustive sampling is driven by an engine's "
                     "decision source, not sample_delay")


@dataclass
class DelayPolicy:
    """Per-node assignment/gate delay bounds plus the sampling mode."""

    default: TimeInterval = TimeInterval(1, 1)
    overrides: dict = field(default_factory=dict)
    sampling: Sampling = Sampling.UNIFORM_RANDOM

    def interval_for(self, node: str) -> TimeInterval:
        return self.overrides.get(node, self.default)


@dataclass
class Trace:
    """Recorded run: transitions, derived usage intervals, run identity.

    transitions are (time, node_name, value) triples sorted by
    (time, schedule order); usage maps client name to half-open
    [start, end) occupancy intervals.
    """

    transitions: list
    usage: dict
    seed: int = 0
    variant: str = ""
    horizon: int = 0
    deadlocked: bool = False
    deadlock_time: int = -1

    def nodes(self):
        return sorted({n for (_, n, _) in self.transitions})

    def restricted(self, nodes) -> "Trace":
        """Trace over a subset of nodes (internal wires hidden)."""
        keep = set(nodes)
        return Trace(
            transitions=[tr for tr in self.transitions if tr[1] in keep],
            usage=dict(self.usage),
            seed=self.seed, variant=self.variant, horizon=self.horizon,
            deadlocked=self.deadlocked, deadlock_time=self.deadlock_time)

    def ordering(self):
        """Visible ordering: the (node, value) sequence without times."""
        return tuple((n, v) for (_, n, v) in self.transitions)


class TraceFormatError(ValueError):
    def __init__(self, path, lineno, msg):
        self.path = path
        self.lineno = lineno
        super().__init__("%s:%d: %s" % (path, lineno, msg))


def write_trace(trace: Trace, path) -> None:
    lines = []
    lines.append("# seed=%d" % trace.seed)
    lines.append("# variant=%s" % trace.variant)
    lines.append("# horizon=%d" % trace.horizon)
    lines.append("# deadlocked=%d" % (1 if trace.deadlocked else 0))
    if trace.deadlocked:
        lines.append("# deadlock_time=%d" % trace.deadlock_time)
    for (t, node, val) in trace.transitions:
        lines.append("%d,%s,%d" % (t, node, 1 if val else 0))
    for client in sorted(trace.usage):
        for (s, e) in trace.usage[client]:
            lines.append("usage,%s,%d,%d" % (client, s, e))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines))
        f.write("\n")


def read_trace(path) -> Trace:
    meta = {}
    transitions = []
    usage = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" not in body:
                    raise TraceFormatError(path, lineno,
                                           "malformed header: %r" % line)
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
                continue
            parts = line.split(",")
            if parts[0] == "usage":
                if len(parts) != 4:
                    raise TraceFormatError(path, lineno,
                                           "usage line needs 4 fields")
                try:
                    s = int(parts[2])
                    e = int(parts[3])
                except ValueError:
                    raise TraceFormatError(path, lineno,
                                           "usage bounds must be integers")
                usage.setdefault(parts[1], []).append((s, e))
                continue
            if len(parts) != 3:
                raise TraceFormatError(path, lineno,
                                       "transition line needs 3 fields")
            try:
                t = int(parts[0])
            except ValueError:
                raise TraceFormatError(path, lineno, "bad timestamp")
            if parts[2] not in ("0", "1"):
                raise TraceFormatError(path, lineno, "value must be 0 or 1")
            if transitions and t < transitions[-1][0]:
                raise TraceFormatError(path, lineno,
                                       "timestamps must be nondecreasing")
            transitions.append((t, parts[1], int(parts[2])))
    try:
        seed = int(meta.get("seed", "0"))
        horizon = int(meta.get("horizon", "0"))
        deadlocked = meta.get("deadlocked", "0") == "1"
        deadlock_time = int(meta.get("deadlock_time", "-1"))
    except ValueError:
        raise TraceFormatError(path, 0, "malformed numeric header value")
    return Trace(transitions=transitions, usage=usage,
                 seed=seed, variant=meta.get("variant", ""),
                 horizon=horizon, deadlocked=deadlocked,
                 deadlock_time=deadlock_time)
