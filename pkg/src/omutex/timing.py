"""Interval algebra for timing forks and zigzags.

A timing fork bounds the separation of two events caused by a common
source through delays known only as intervals; a zigzag chains two
forks so that an ordering observed on one side implies a minimum
separation on the other.  server_bounds specializes the algebra to the
mutual-exclusion server: w1 bounds how long after the observed early
release the resource can still be in use, w2 bounds how long after an
observed request the resource can remain unused, and w2 >= w1 certifies
that granting on the early release is safe.

Everything here is a pure function over value types; time is integer
ticks throughout.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class TimeInterval:
    """Closed interval [lo, hi] of integer ticks."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (isinstance(self.lo, int) and isinstance(self.hi, int)):
            raise ValueError("interval endpoints must be integers")
        if self.lo > self.hi:
            raise ValueError(
                "empty interval: lo=%d > hi=%d" % (self.lo, self.hi))

    def require_nonneg(self, what="delay"):
        """Physical delays and leads cannot be negative."""
        if self.lo < 0:
            raise ValueError("%s interval %s has negative lower bound"
                             % (what, self))
        return self

    def contains(self, t: int) -> bool:
        return self.lo <= t <= self.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    def __str__(self):
        return "[%d,%d]" % (self.lo, self.hi)

    @staticmethod
    def parse(text: str) -> "TimeInterval":
        """Parse 'lo..hi' or a bare integer point interval."""
        s = text.strip()
        if ".." in s:
            a, b = s.split("..", 1)
            return TimeInterval(int(a), int(b))
        v = int(s)
        return TimeInterval(v, v)


@dataclass(frozen=True)
class ZigzagScenario:
    """Concrete event times t1..t6 drawn from two forks (dA, dC are the
    delay windows of the fork arms, kept for reporting)."""

    t1: int
    t2: int
    t3: int
    t4: int
    t5: int
    t6: int
    dA: TimeInterval
    dC: TimeInterval

    def __post_init__(self):
        if self.t3 < self.t1 or self.t5 < self.t1:
            raise ValueError("fork effects precede their cause t1")
        if self.t4 < self.t2 or self.t6 < self.t2:
            raise ValueError("fork effects precede their cause t2")


@dataclass(frozen=True)
class ZigzagCert:
    """Server-side safety certificate: safe iff w2 >= w1."""

    w1: int
    w2: int
    weight: int
    safe: bool

    def __post_init__(self):
        if self.weight != self.w2 - self.w1:
            raise ValueError("weight must equal w2 - w1")
        if self.safe != (self.w2 >= self.w1):
            raise ValueError("safe must equal (w2 >= w1)")

    @staticmethod
    def of(w1: int, w2: int) -> "ZigzagCert":
        return ZigzagCert(w1, w2, w2 - w1, w2 >= w1)

    def __str__(self):
        return "w1=%d w2=%d weight=%d safe=%s" % (
            self.w1, self.w2, self.weight, "yes" if self.safe else "no")


@dataclass(frozen=True)
class ClientTimingParams:
    """Client-side timing behavior, all bounds as closed tick intervals.

    early_release_lead is how long before its actual release the client
    lowers the early-release wire; preemption_lead is how long before
    actually needing the resource the client raises its request;
    idle_gap separates a completed handshake from the next request; the
    three link delays model the wires toward the server and back.
    """

    usage_time: TimeInterval
    early_release_lead: TimeInterval
    preemption_lead: TimeInterval
    idle_gap: TimeInterval
    link_delay_request: TimeInterval
    link_delay_early: TimeInterval
    link_delay_ack: TimeInterval

    def __post_init__(self):
        self.usage_time.require_nonneg("usage_time")
        self.early_release_lead.require_nonneg("early_release_lead")
        self.preemption_lead.require_nonneg("preemption_lead")
        self.idle_gap.require_nonneg("idle_gap")
        self.link_delay_request.require_nonneg("link_delay_request")
        self.link_delay_early.require_nonneg("link_delay_early")
        self.link_delay_ack.require_nonneg("link_delay_ack")
        if self.early_release_lead.hi > self.usage_time.lo:
            raise ValueError(
                "early_release_lead.hi=%d exceeds usage_time.lo=%d: a client "
                "cannot signal almost-done before it could be granted"
                % (self.early_release_lead.hi, self.usage_time.lo))


def fork_weight(head_delay: TimeInterval, tail_delay: TimeInterval) -> int:
    """Minimum separation of the fork's head event after its tail event.

    Negative results are maximum separations in the other direction.
    """
    return head_delay.lo - tail_delay.hi


def zigzag_weight(w1: int, w2: int) -> int:
    """Weight of the zigzag chaining a fork of weight w1 into one of w2."""
    return w2 - w1


def server_bounds(c1: ClientTimingParams, c2: ClientTimingParams) -> ZigzagCert:
    """Server-observable safety bounds for granting C2 on C1's early release.

    w1: after the server sees the early release, the resource may stay
    in use for at most sup(lead) - inf(link) more ticks.  w2: after the
    server sees C2's request, the resource stays unused for at least
    inf(lead) - sup(link) ticks.  Both are worst-case over the link
    windows, so safe=true is conservative.
    """
    w1 = c1.early_release_lead.hi - c1.link_delay_early.lo
    w2 = c2.preemption_lead.lo - c2.link_delay_request.hi
    return ZigzagCert.of(w1, w2)


def scenario_check(s: ZigzagScenario, w1: int, w2: int) -> bool:
    """Oracle for the zigzag inference rule on one concrete scenario.

    True iff (t4 >= t3 and w2 - w1 >= 0) implies t6 > t5.
    """
    if s.t4 >= s.t3 and w2 - w1 >= 0:
        return s.t6 > s.t5
    return True
