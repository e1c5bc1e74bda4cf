"""Client (environment) processes that drive the server's channels.

Two client shapes exist.  An early/actual client owns three wires: it
raises r_e and r_a together when requesting, and when releasing lowers
r_e a bounded lead time before r_a.  A simple client owns two wires and
raises its request a bounded lead time before it actually requires the
resource; it starts using at max(grant arrival, required-use time).

Clients are realized as command generators for the event kernel, so the
same definitions drive every server variant.  All delays are drawn from
the client's own named stream in a fixed per-cycle order; point
intervals consume no randomness.  That keeps a client's decision
sequence identical across variants at a fixed seed, which the paired
idle-time comparison relies on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

from omutex import kernel
from omutex.timing import ClientTimingParams


class ChannelRole(enum.Enum):
    EARLY_ACTUAL = "early_actual"
    SIMPLE = "simple"


@dataclass(frozen=True)
class ChannelSpec:
    """Names the wires of one client channel.

    EarlyActual: <name>.r_e, <name>.r_a, <name>.a
    Simple:      <name>.r, <name>.a
    """

    role: ChannelRole
    name: str

    @staticmethod
    def early_actual(name: str) -> "ChannelSpec":
        return ChannelSpec(ChannelRole.EARLY_ACTUAL, name)

    @staticmethod
    def simple(name: str) -> "ChannelSpec":
        return ChannelSpec(ChannelRole.SIMPLE, name)

    @property
    def request_early(self) -> str:
        if self.role is not ChannelRole.EARLY_ACTUAL:
            raise AttributeError("simple channel has no early request wire")
        return self.name + ".r_e"

    @property
    def request_actual(self) -> str:
        if self.role is not ChannelRole.EARLY_ACTUAL:
            raise AttributeError("simple channel has no actual request wire")
        return self.name + ".r_a"

    @property
    def request(self) -> str:
        if self.role is not ChannelRole.SIMPLE:
            raise AttributeError("early/actual channel splits its request")
        return self.name + ".r"

    @property
    def ack(self) -> str:
        return self.name + ".a"

    def wires(self):
        if self.role is ChannelRole.EARLY_ACTUAL:
            return (self.request_early, self.request_actual, self.ack)
        return (self.request, self.ack)

    def request_wires(self):
        if self.role is ChannelRole.EARLY_ACTUAL:
            return (self.request_early, self.request_actual)
        return (self.request,)


@dataclass(frozen=True)
class ClientProcess:
    channel: ChannelSpec
    params: ClientTimingParams
    request_count: Optional[int]    # None = unbounded

    def __post_init__(self):
        if self.request_count is not None and self.request_count < 0:
            raise ValueError("request_count must be >= 0 or None")


def build_client(spec: ChannelSpec, params: ClientTimingParams,
                 n: Optional[int] = None) -> ClientProcess:
    return ClientProcess(spec, params, n)


def _cycles(n):
    if n is None:
        while True:
            yield None
    else:
        for _ in range(n):
            yield None


def _early_actual_gen(client, re_i, ra_i, a_i, sampler):
    p = client.params
    label = client.channel.name
    now = 0
    for _ in _cycles(client.request_count):
        gap = sampler.draw(p.idle_gap.lo, p.idle_gap.hi)
        now = yield (kernel.C_DELAY, gap)
        tq = now
        d_e = sampler.draw(p.link_delay_early.lo, p.link_delay_early.hi)
        d_r = sampler.draw(p.link_delay_request.lo, p.link_delay_request.hi)
        yield (kernel.C_EMIT, re_i, 1, tq + d_e)
        yield (kernel.C_EMIT, ra_i, 1, tq + d_r)
        now = yield (kernel.C_WAIT, a_i, 1)
        d_ack = sampler.draw(p.link_delay_ack.lo, p.link_delay_ack.hi)
        grant_obs = now + d_ack
        usage = sampler.draw(p.usage_time.lo, p.usage_time.hi)
        lead = sampler.draw(p.early_release_lead.lo, p.early_release_lead.hi)
        # lead.hi <= usage.lo, so the early drop never precedes the grant
        t_rel = grant_obs + usage
        d_e2 = sampler.draw(p.link_delay_early.lo, p.link_delay_early.hi)
        d_r2 = sampler.draw(p.link_delay_request.lo, p.link_delay_request.hi)
        yield (kernel.C_USAGE, label, grant_obs, t_rel)
        yield (kernel.C_EMIT, re_i, 0, t_rel - lead + d_e2)
        yield (kernel.C_EMIT, ra_i, 0, t_rel + d_r2)
        now = yield (kernel.C_WAIT, a_i, 0)
        d_ack2 = sampler.draw(p.link_delay_ack.lo, p.link_delay_ack.hi)
        now = yield (kernel.C_DELAY_UNTIL, now + d_ack2)


def _simple_gen(client, r_i, a_i, sampler):
    p = client.params
    label = client.channel.name
    now = 0
    for _ in _cycles(client.request_count):
        gap = sampler.draw(p.idle_gap.lo, p.idle_gap.hi)
        now = yield (kernel.C_DELAY, gap)
        tq = now
        d_r = sampler.draw(p.link_delay_request.lo, p.link_delay_request.hi)
        plead = sampler.draw(p.preemption_lead.lo, p.preemption_lead.hi)
        required = tq + plead
        yield (kernel.C_EMIT, r_i, 1, tq + d_r)
        now = yield (kernel.C_WAIT, a_i, 1)
        d_ack = sampler.draw(p.link_delay_ack.lo, p.link_delay_ack.hi)
        grant_obs = now + d_ack
        start = grant_obs if grant_obs > required else required
        usage = sampler.draw(p.usage_time.lo, p.usage_time.hi)
        end = start + usage
        d_r2 = sampler.draw(p.link_delay_request.lo, p.link_delay_request.hi)
        yield (kernel.C_USAGE, label, start, end)
        yield (kernel.C_EMIT, r_i, 0, end + d_r2)
        now = yield (kernel.C_WAIT, a_i, 0)
        d_ack2 = sampler.draw(p.link_delay_ack.lo, p.link_delay_ack.hi)
        now = yield (kernel.C_DELAY_UNTIL, now + d_ack2)


def command_factory(client: ClientProcess, node_index):
    """Bind a client to engine node indices.

    Returns factory(sampler) -> command generator, the shape
    HseEngine.add_client_seeded expects.
    """
    ch = client.channel
    if ch.role is ChannelRole.EARLY_ACTUAL:
        re_i = node_index[ch.request_early]
        ra_i = node_index[ch.request_actual]
        a_i = node_index[ch.ack]

        def factory(sampler):
            return _early_actual_gen(client, re_i, ra_i, a_i, sampler)
    else:
        r_i = node_index[ch.request]
        a_i = node_index[ch.ack]

        def factory(sampler):
            return _simple_gen(client, r_i, a_i, sampler)
    return factory
