"""Independent reference implementations used to check the simulator.

These deliberately use brute force (exhaustive enumeration, fixpoint closure)
and share no code with the paths they verify.
"""
from __future__ import annotations

import random

from natdis.dtn import DtnNetwork, Message

INF = float("inf")


def enumerate_shortest(graph, src_vid: int, dst_vid: int) -> float | None:
    """Minimum path length between two vertices by exhaustive simple-path DFS."""
    best = None
    stack = [(src_vid, 0.0, {src_vid})]
    while stack:
        v, dist, visited = stack.pop()
        if v == dst_vid:
            if best is None or dist < best:
                best = dist
            continue
        for eid, w in graph.adjacency[v]:
            if w not in visited:
                stack.append((w, dist + graph.edges[eid].length, visited | {w}))
    return best


def closure_oracle(events, final_time: float) -> dict[str, float]:
    """Time-respecting reachability with unconstrained bandwidth.

    Whenever a link is live, anything one side holds floods transitively to
    the other at that instant. Returns message id -> first delivery time.
    """
    holders: dict[str, set[int]] = {}
    destinations: dict[str, int] = {}
    delivered_at: dict[str, float] = {}
    live: set[tuple[int, int]] = set()

    def flood(now: float) -> None:
        changed = True
        while changed:
            changed = False
            for a, b in live:
                for mid, hs in holders.items():
                    for u, v in ((a, b), (b, a)):
                        if u in hs and v not in hs:
                            hs.add(v)
                            changed = True
                            if v == destinations[mid] and mid not in delivered_at:
                                delivered_at[mid] = now

    for t, kind, *data in events:
        if kind == "up":
            live.add((data[0], data[1]))
        elif kind == "down":
            live.discard((data[0], data[1]))
        else:
            message = data[0]
            holders[message.id] = {message.source}
            destinations[message.id] = message.destination
        flood(t)
    flood(final_time)
    return delivered_at


def replay_on_network(events, n: int, final_time: float) -> DtnNetwork:
    """Drive the real DTN stack from a scripted event sequence."""
    net = DtnNetwork(n, phy_rate_bps=INF, buffer_bytes=INF)
    for t, kind, *data in events:
        net.advance(t)
        if kind == "up":
            net.link_up(data[0], data[1], t)
        elif kind == "down":
            net.link_down(data[0], data[1], t)
        else:
            net.create_message(data[0], t)
        net.advance(t)
    net.advance(final_time)
    return net


def random_trace(rng: random.Random, n_nodes: int, n_contacts: int, n_messages: int):
    """Random UP/DOWN contact script with interleaved message creations."""
    events = []
    live: set[tuple[int, int]] = set()
    t = 0.0
    for _ in range(n_contacts):
        t += rng.uniform(0.5, 5.0)
        a, b = rng.sample(range(n_nodes), 2)
        key = (min(a, b), max(a, b))
        if key in live:
            events.append((t, "down", key[0], key[1]))
            live.discard(key)
        else:
            events.append((t, "up", key[0], key[1]))
            live.add(key)
    for k in range(n_messages):
        ct = rng.uniform(0, t) if t > 0 else 0.0
        src, dst = rng.sample(range(n_nodes), 2)
        events.append((ct, "msg", Message(f"m{k}", src, dst, 1000, ct, ttl=INF)))
    events.sort(key=lambda e: (e[0], e[1]))
    return events, t + 10.0
