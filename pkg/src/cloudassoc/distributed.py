"""Token-passing execution of the cloud auction.

Each cloud is an agent that owns its reward row, weight row, capacity, and
its last bids. The only thing that travels is a price token around the
logical ring 0 -> 1 -> ... -> C-1 -> 0. An agent that receives the token
performs exactly one bidding event and passes the updated prices on.

The token also carries a count of consecutive unchanged iterations. The
agent that sees the count reach C marks the token converged; it then makes
one more lap so every cloud learns that the auction is over.

Wire format of a token (all little-endian)::

    u32  length of the remainder in bytes
    i64  t          iteration whose prices are carried (0 = initial prices)
    i32  sender     cloud id, 0-based; -1 for the bootstrap token
    u32  U
    f64  price[0..U-1]
    u32  quiet      consecutive unchanged iterations      (optional trailer)
    u8   converged  0 or 1                                (optional trailer)

Decoders accept records with or without the trailer.
"""
from __future__ import annotations

import struct
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import dcaa
from .gap import GapInstance, InvalidInputError
from .knapsack import GAMMA, SUBROUTINES

__all__ = [
    "ProtocolStall",
    "PriceMessage",
    "CloudAgent",
    "DistributedResult",
    "run_distributed",
    "message_volume",
    "encode_message",
    "decode_message",
]

_HEAD = struct.Struct("<qiI")
_TRAILER = struct.Struct("<IB")
_LEN = struct.Struct("<I")


class ProtocolStall(RuntimeError):
    """The token disappeared before the auction finished."""


@dataclass(frozen=True)
class PriceMessage:
    t: int
    sender: int
    prices: tuple
    quiet: int = 0
    converged: bool = False

    def __post_init__(self):
        if any(p < 0 for p in self.prices):
            raise InvalidInputError("prices must be non-negative")


def encode_message(msg: PriceMessage) -> bytes:
    body = (_HEAD.pack(msg.t, msg.sender, len(msg.prices))
            + struct.pack(f"<{len(msg.prices)}d", *msg.prices)
            + _TRAILER.pack(msg.quiet, int(msg.converged)))
    return _LEN.pack(len(body)) + body


def decode_message(data: bytes) -> PriceMessage:
    if len(data) < _LEN.size + _HEAD.size:
        raise InvalidInputError("truncated price message")
    (length,) = _LEN.unpack_from(data)
    body = data[_LEN.size:]
    if len(body) != length:
        raise InvalidInputError(f"length prefix {length} but {len(body)} bytes follow")
    t, sender, U = _HEAD.unpack_from(body)
    end = _HEAD.size + 8 * U
    if length not in (end, end + _TRAILER.size):
        raise InvalidInputError(f"record of {length} bytes does not fit U={U}")
    prices = struct.unpack_from(f"<{U}d", body, _HEAD.size)
    quiet, converged = _TRAILER.unpack_from(body, end) if length > end else (0, 0)
    return PriceMessage(t, sender, prices, quiet, bool(converged))


class CloudAgent:
    def __init__(self, cloud_id: int, num_clouds: int, rewards_row, weights_row,
                 capacity: int, subroutine: str = "exact"):
        self.cloud_id = cloud_id
        self.num_clouds = num_clouds
        self.rewards = np.array(rewards_row, dtype=np.float64)
        self.weights = np.array(weights_row, dtype=np.int64)
        self.capacity = int(capacity)
        self.solver = SUBROUTINES[subroutine]
        self.bids: dict = {}
        self.held: tuple = ()
        self.stamp = 0
        self.finished = False

    @classmethod
    def from_instance(cls, instance: GapInstance, c: int, subroutine: str = "exact"):
        return cls(c, instance.num_clouds, instance.rewards[c], instance.weights[c],
                   instance.capacities[c], subroutine)

    def receive(self, msg: PriceMessage):
        """Handle the token; returns ``(outgoing_message, step_record_or_None)``."""
        if msg.converged:
            # announcement lap: relay without bidding
            self.finished = True
            return PriceMessage(msg.t, self.cloud_id, msg.prices, msg.quiet, True), None
        t = msg.t + 1
        if dcaa.active_cloud(t, self.num_clouds) != self.cloud_id:
            raise InvalidInputError(f"cloud {self.cloud_id} received token for iteration {t}")
        before = np.array(msg.prices)
        prices, chosen, new_bids, resets = dcaa.bid(
            self.rewards, self.weights, self.capacity, before, self.held, self.bids,
            t, self.num_clouds, self.solver)
        changed = chosen != self.held or not np.array_equal(prices, before)
        self.held, self.bids, self.stamp = chosen, new_bids, t
        quiet = 0 if changed else msg.quiet + 1
        converged = quiet >= self.num_clouds
        self.finished = converged
        out = PriceMessage(t, self.cloud_id, tuple(prices.tolist()), quiet, converged)
        record = dcaa.StepRecord(t, self.cloud_id, resets, chosen, out.prices, changed)
        return out, record


@dataclass(frozen=True)
class DistributedResult(dcaa.AuctionResult):
    messages: tuple = field(default=(), repr=False)


def run_distributed(instance: GapInstance, subroutine: str = "exact",
                    max_rounds: int = dcaa.DEFAULT_MAX_ROUNDS, keep_trace: bool = False,
                    drop_hops=(), wire: bool = True) -> DistributedResult:
    """Run the auction as C agents exchanging one price token.

    ``drop_hops`` lists delivery indices (0 = bootstrap) whose message is
    lost, for failure testing; a lost token raises ``ProtocolStall``. With
    ``wire`` set, every hop goes through the binary encoding.
    """
    if subroutine not in SUBROUTINES:
        raise InvalidInputError(f"unknown knapsack subroutine {subroutine!r}")
    C, U = instance.num_clouds, instance.num_users
    agents = [CloudAgent.from_instance(instance, c, subroutine) for c in range(C)]
    inbox = [deque() for _ in range(C)]
    drop = set(drop_hops)
    limit = max_rounds * C
    delivered: list = []
    trace: list = []

    def send(dest: int, msg: PriceMessage):
        hop = len(delivered)
        delivered.append(msg)
        if hop in drop:
            return
        inbox[dest].append(decode_message(encode_message(msg)) if wire else msg)

    send(0, PriceMessage(0, -1, (0.0,) * U))
    last = None
    while True:
        holders = [c for c in range(C) if inbox[c]]
        if not holders:
            raise ProtocolStall(f"token lost after {len(delivered)} sends "
                                f"(last iteration {last.t if last else 0})")
        c = holders[0]
        msg = inbox[c].popleft()
        if msg.converged and agents[c].finished:
            last = msg
            break  # the announcement lap is back where it started
        out, record = agents[c].receive(msg)
        last = out
        if record is not None and keep_trace:
            trace.append(record)
        if not out.converged and out.t >= limit:
            break
        send((c + 1) % C, out)

    prices = np.array(last.prices)
    assignment = dcaa.extract_assignment(prices, [a.held for a in agents],
                                         [a.bids for a in agents],
                                         [a.stamp for a in agents], U)
    value = sum(float(instance.rewards[c, u]) for u, c in enumerate(assignment) if c is not None)
    return DistributedResult(assignment, value, last.t, last.converged, GAMMA[subroutine],
                             tuple(last.prices), tuple(trace), tuple(delivered))


def message_volume(result: DistributedResult) -> int:
    """Scalars exchanged between clouds: one price vector per delivered token."""
    return sum(len(m.prices) for m in result.messages)
