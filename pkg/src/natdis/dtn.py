"""Store-carry-forward networking: contacts, buffers, epidemic replication.

Transfers are tracked event-style: each live link serializes its queued
messages at the configured PHY rate (half duplex, directions alternating
message by message), and the network processes completion events up to the
current clock. That is arithmetically identical to moving rate*dt bits per
step, but idle links cost nothing.
"""
from __future__ import annotations

import heapq
import math
import random
from collections import deque
from dataclasses import dataclass, field

import numpy as np

INF = math.inf

DEFAULT_BUFFER_BYTES = 20_000_000
DEFAULT_PHY_RATE_BPS = 2_000_000.0
DEFAULT_TTL_S = 21_600.0
DEFAULT_RADIO_RANGE_M = 10.0

DROP_POLICIES = ("oldest_received", "newest_received", "random")


@dataclass(frozen=True)
class Message:
    id: str
    source: int
    destination: int
    size: int
    created_at: float
    ttl: float = DEFAULT_TTL_S

    def expired(self, now: float) -> bool:
        return now - self.created_at > self.ttl


@dataclass
class HeldCopy:
    message: Message
    received_at: float
    hops: int


@dataclass
class MessageRecord:
    """Lifetime bookkeeping for one message id, kept after replicas die."""

    message: Message
    seq: int
    delivered_at: float | None = None
    delivery_hops: int | None = None
    holders: set[int] = field(default_factory=set)
    expired: bool = False


class Buffer:
    """Finite message store with drop-oldest eviction and origin protection."""

    def __init__(
        self,
        owner: int,
        capacity: float = DEFAULT_BUFFER_BYTES,
        policy: str = "oldest_received",
        rng: random.Random | None = None,
    ):
        if policy not in DROP_POLICIES:
            raise ValueError(f"unknown drop policy {policy!r}")
        self.owner = owner
        self.capacity = capacity
        self.policy = policy
        self.rng = rng
        self.held: dict[str, HeldCopy] = {}  # insertion order == receive order
        self.held_bytes = 0
        self._expiry: list[tuple[float, str]] = []  # lazy heap, stale entries allowed

    def __contains__(self, msg_id: str) -> bool:
        return msg_id in self.held

    @property
    def occupancy(self) -> float:
        if self.capacity == INF:
            return 0.0
        return self.held_bytes / self.capacity

    def remove(self, msg_id: str) -> None:
        copy = self.held.pop(msg_id, None)
        if copy is not None:
            self.held_bytes -= copy.message.size

    def drop_expired(self, now: float) -> list[str]:
        dropped = []
        while self._expiry and self._expiry[0][0] < now:
            _, mid = heapq.heappop(self._expiry)
            copy = self.held.get(mid)
            if copy is not None and copy.message.expired(now):
                self.remove(mid)
                dropped.append(mid)
        return dropped

    def _eviction_order(self):
        if self.policy == "oldest_received":
            return self.held  # dict iteration order == receive order
        ids = list(self.held)
        if self.policy == "newest_received":
            return reversed(ids)
        self.rng.shuffle(ids)
        return ids

    def admit(self, message: Message, now: float, hops: int) -> tuple[bool, list[str]]:
        """Try to store a message; returns (admitted, removed message ids).

        Expired holdings are dropped first; then victims are evicted in policy
        order, skipping messages this node originated (origin protection) and
        never the incoming message itself. If even full eviction cannot make
        room, nothing is evicted and the message is rejected.
        """
        if message.id in self.held:
            return False, []
        removed: list[str] = []
        if message.size > self.capacity:
            return False, removed
        if self.held_bytes + message.size > self.capacity:
            removed.extend(self.drop_expired(now))
        overshoot = self.held_bytes + message.size - self.capacity
        if overshoot > 0:
            victims = []
            freed = 0
            for mid in self._eviction_order():
                copy = self.held[mid]
                if copy.message.source == self.owner and not copy.message.expired(now):
                    continue
                victims.append(mid)
                freed += copy.message.size
                if freed >= overshoot:
                    break
            if freed < overshoot:
                return False, removed
            for mid in victims:
                self.remove(mid)
            removed.extend(victims)
        self.held[message.id] = HeldCopy(message, now, hops)
        self.held_bytes += message.size
        if message.ttl != INF:
            heapq.heappush(self._expiry, (message.created_at + message.ttl, message.id))
        return True, removed


class EncounterLog:
    """Per-node encounter totals and distinct peer sets."""

    def __init__(self, n: int):
        self.total = np.zeros(n, dtype=np.int64)
        self.unique: list[set[int]] = [set() for _ in range(n)]

    def record(self, a: int, b: int) -> None:
        self.total[a] += 1
        self.total[b] += 1
        self.unique[a].add(b)
        self.unique[b].add(a)


class ContactDetector:
    """Range-threshold contact tracking over per-step position samples."""

    def __init__(self, n: int, range_m: float = DEFAULT_RADIO_RANGE_M):
        if range_m <= 0:
            raise ValueError("radio range must be positive")
        self.n = n
        self.range2 = range_m * range_m
        self.i1, self.i2 = np.triu_indices(n, k=1)
        self.prev = np.zeros(len(self.i1), dtype=bool)

    def update(
        self, x: np.ndarray, y: np.ndarray, radio_on: np.ndarray
    ) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
        """Returns (link_up pairs, link_down pairs) since the previous sample."""
        dx = x[self.i1] - x[self.i2]
        dy = y[self.i1] - y[self.i2]
        cur = (dx * dx + dy * dy <= self.range2) & radio_on[self.i1] & radio_on[self.i2]
        changed = cur ^ self.prev
        ups = np.nonzero(changed & cur)[0]
        downs = np.nonzero(changed & self.prev)[0]
        self.prev = cur
        up_pairs = [(int(self.i1[k]), int(self.i2[k])) for k in ups]
        down_pairs = [(int(self.i1[k]), int(self.i2[k])) for k in downs]
        return up_pairs, down_pairs


class _Direction:
    """One direction of a link: priority (destined-to-peer) then normal FIFO."""

    __slots__ = ("priority", "normal", "queued")

    def __init__(self):
        self.priority: deque[str] = deque()
        self.normal: deque[str] = deque()
        self.queued: set[str] = set()

    def push(self, msg_id: str, priority: bool) -> bool:
        if msg_id in self.queued:
            return False
        self.queued.add(msg_id)
        (self.priority if priority else self.normal).append(msg_id)
        return True

    def pop(self) -> str | None:
        for q in (self.priority, self.normal):
            if q:
                mid = q.popleft()
                self.queued.discard(mid)
                return mid
        return None

    def __bool__(self) -> bool:
        return bool(self.priority) or bool(self.normal)

    def __len__(self) -> int:
        return len(self.priority) + len(self.normal)


class ContactLink:
    """A live radio contact carrying serialized message transfers."""

    __slots__ = ("a", "b", "established_at", "dirs", "inflight", "last_dir", "token")

    def __init__(self, a: int, b: int, now: float):
        self.a = a
        self.b = b
        self.established_at = now
        self.dirs = (_Direction(), _Direction())  # 0: a->b, 1: b->a
        self.inflight: tuple[int, Message, float, int] | None = None  # dir, msg, done_at, hops
        self.last_dir = 1  # so the lower node id sends first
        self.token = 0

    def endpoint(self, direction: int) -> tuple[int, int]:
        return (self.a, self.b) if direction == 0 else (self.b, self.a)


class DtnNetwork:
    """Buffers, links, and epidemic replication for one simulation run."""

    def __init__(
        self,
        n: int,
        phy_rate_bps: float = DEFAULT_PHY_RATE_BPS,
        buffer_bytes: float = DEFAULT_BUFFER_BYTES,
        drop_policy: str = "oldest_received",
        drop_rng: random.Random | None = None,
    ):
        self.n = n
        self.phy_rate = phy_rate_bps
        self.buffers = [Buffer(i, buffer_bytes, drop_policy, drop_rng) for i in range(n)]
        self.links: dict[tuple[int, int], ContactLink] = {}
        self.links_of: list[set[tuple[int, int]]] = [set() for _ in range(n)]
        self.records: dict[str, MessageRecord] = {}
        self._event_heap: list[tuple[float, int, tuple[int, int], int]] = []
        self._expiry_heap: list[tuple[float, int, str]] = []
        self._event_seq = 0
        self._msg_seq = 0
        self.delivered_count = 0
        self.created_count = 0

    # -- registry ------------------------------------------------------------

    def _register(self, message: Message) -> MessageRecord:
        record = self.records.get(message.id)
        if record is None:
            record = MessageRecord(message, self._msg_seq)
            self._msg_seq += 1
            self.records[message.id] = record
        return record

    def _order_key(self, msg_id: str) -> tuple[float, int]:
        rec = self.records[msg_id]
        return rec.message.created_at, rec.seq

    def _drop_copy(self, node: int, msg_id: str) -> None:
        self.buffers[node].remove(msg_id)
        rec = self.records.get(msg_id)
        if rec is not None:
            rec.holders.discard(node)

    def _store(self, node: int, message: Message, now: float, hops: int) -> bool:
        admitted, removed = self.buffers[node].admit(message, now, hops)
        for mid in removed:
            rec = self.records.get(mid)
            if rec is not None:
                rec.holders.discard(node)
        if admitted:
            self.records[message.id].holders.add(node)
        return admitted

    # -- message lifecycle -----------------------------------------------------

    def create_message(self, message: Message, now: float | None = None) -> bool:
        """Originate a message at its source node; returns False if the source
        buffer rejects it."""
        if message.source == message.destination:
            raise ValueError("message source and destination must differ")
        now = message.created_at if now is None else now
        record = self._register(message)
        self.created_count += 1
        if message.ttl != INF:
            heapq.heappush(self._expiry_heap, (message.created_at + message.ttl, record.seq, message.id))
        if not self._store(message.source, message, now, hops=0):
            return False
        self._offer_to_links(message.source, message, now)
        return True

    def expire(self, now: float) -> list[str]:
        """Purge every replica of messages whose TTL has lapsed (strict >)."""
        dropped = []
        while self._expiry_heap and self._expiry_heap[0][0] < now:
            _, _, msg_id = heapq.heappop(self._expiry_heap)
            rec = self.records[msg_id]
            for node in sorted(rec.holders):
                self.buffers[node].remove(msg_id)
            rec.holders.clear()
            rec.expired = True
            dropped.append(msg_id)
        return dropped

    # -- link lifecycle ----------------------------------------------------------

    @staticmethod
    def _key(a: int, b: int) -> tuple[int, int]:
        return (a, b) if a < b else (b, a)

    def link_up(self, a: int, b: int, now: float) -> ContactLink:
        key = self._key(a, b)
        if key in self.links:
            return self.links[key]
        link = ContactLink(key[0], key[1], now)
        self.links[key] = link
        self.links_of[a].add(key)
        self.links_of[b].add(key)
        for direction in (0, 1):
            sender, receiver = link.endpoint(direction)
            peer_held = self.buffers[receiver].held
            novel = [mid for mid in self.buffers[sender].held if mid not in peer_held]
            novel.sort(key=self._order_key)  # oldest created first
            for mid in novel:
                link.dirs[direction].push(
                    mid, self.records[mid].message.destination == receiver
                )
        self._kick(link, now)
        return link

    def link_down(self, a: int, b: int, now: float) -> None:
        key = self._key(a, b)
        link = self.links.pop(key, None)
        if link is None:
            return
        self.links_of[a].discard(key)
        self.links_of[b].discard(key)
        link.inflight = None  # in-flight transfer aborts with no partial state

    def _offer_to_links(self, holder: int, message: Message, now: float) -> None:
        """Queue a newly acquired message on every live link of its holder."""
        for key in sorted(self.links_of[holder]):
            link = self.links[key]
            direction = 0 if link.a == holder else 1
            receiver = link.b if direction == 0 else link.a
            if message.id in self.buffers[receiver].held:
                continue
            if link.dirs[direction].push(message.id, message.destination == receiver):
                if link.inflight is None:
                    self._kick(link, now)

    # -- transfers ------------------------------------------------------------

    def _kick(self, link: ContactLink, now: float) -> None:
        """Start the next queued transfer if the link is idle."""
        if link.inflight is not None:
            return
        direction = 1 - link.last_dir
        if not link.dirs[direction]:
            direction = link.last_dir
        while link.dirs[0] or link.dirs[1]:
            if not link.dirs[direction]:
                direction = 1 - direction
            mid = link.dirs[direction].pop()
            sender, receiver = link.endpoint(direction)
            copy = self.buffers[sender].held.get(mid)
            rec = self.records[mid]
            if copy is None or mid in self.buffers[receiver] or rec.message.expired(now):
                continue  # stale queue entry
            done_at = now + (rec.message.size * 8.0) / self.phy_rate if self.phy_rate != INF else now
            link.last_dir = direction
            link.token += 1
            link.inflight = (direction, rec.message, done_at, copy.hops + 1)
            self._event_seq += 1
            heapq.heappush(
                self._event_heap, (done_at, self._event_seq, self._key(link.a, link.b), link.token)
            )
            return

    def advance(self, now: float) -> None:
        """Commit every transfer completing at or before `now`."""
        while self._event_heap and self._event_heap[0][0] <= now:
            done_at, _, key, token = heapq.heappop(self._event_heap)
            link = self.links.get(key)
            if link is None or link.token != token or link.inflight is None:
                continue  # link dropped or transfer superseded
            direction, message, _, hops = link.inflight
            link.inflight = None
            sender, receiver = link.endpoint(direction)
            still_held = message.id in self.buffers[sender]
            if still_held and not message.expired(done_at) and message.id not in self.buffers[receiver]:
                if self._store(receiver, message, done_at, hops):
                    rec = self.records[message.id]
                    if receiver == message.destination and rec.delivered_at is None:
                        rec.delivered_at = done_at
                        rec.delivery_hops = hops
                        self.delivered_count += 1
                    self._offer_to_links(receiver, message, done_at)
            self._kick(link, done_at)

    def node_deactivated(self, node: int, now: float) -> None:
        for key in sorted(self.links_of[node]):
            self.link_down(key[0], key[1], now)

    # -- stats ------------------------------------------------------------------

    def held_bytes(self) -> np.ndarray:
        return np.array([b.held_bytes for b in self.buffers], dtype=np.float64)


def parse_contact_trace(text: str) -> list[tuple[float, str, int, int]]:
    """Parse `<time> UP|DOWN <nodeA> <nodeB>` lines into event tuples."""
    events = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4 or parts[1] not in ("UP", "DOWN"):
            raise ValueError(f"trace line {line_no}: expected '<time> UP|DOWN <a> <b>'")
        events.append((float(parts[0]), parts[1], int(parts[2]), int(parts[3])))
    return events


class TrafficGenerator:
    """Network-wide message source: one message per uniform [8, 12] s interval."""

    def __init__(
        self,
        rng: random.Random,
        interval_min_s: float = 8.0,
        interval_max_s: float = 12.0,
        size_min: int = 50_000,
        size_max: int = 100_000,
        ttl_s: float = DEFAULT_TTL_S,
    ):
        self.rng = rng
        self.interval = (interval_min_s, interval_max_s)
        self.sizes = (size_min, size_max)
        self.ttl = ttl_s
        self._seq = 0
        self.next_time = rng.uniform(*self.interval)

    def step(self, now: float, active_ids: list[int]) -> list[Message]:
        """Messages whose creation instants fall in the window ending at `now`."""
        created = []
        while self.next_time <= now:
            t = self.next_time
            self.next_time += self.rng.uniform(*self.interval)
            if len(active_ids) < 2:
                continue  # too few active nodes: skip this tick, keep the cadence
            src = active_ids[self.rng.randrange(len(active_ids))]
            dst = src
            while dst == src:
                dst = active_ids[self.rng.randrange(len(active_ids))]
            size = self.rng.randint(*self.sizes)
            self._seq += 1
            created.append(Message(f"m{self._seq}", src, dst, size, t, self.ttl))
        return created
