import math
import random

import numpy as np
import pytest

from oracles import closure_oracle, random_trace, replay_on_network
from natdis.dtn import (
    Buffer,
    ContactDetector,
    DtnNetwork,
    EncounterLog,
    Message,
    TrafficGenerator,
    parse_contact_trace,
)

INF = math.inf


def msg(mid, src, dst, size=50_000, created=0.0, ttl=21_600.0):
    return Message(mid, src, dst, size, created, ttl)


# -- contact detection ----------------------------------------------------------


def test_static_pair_single_encounter():
    det = ContactDetector(2, range_m=10.0)
    log = EncounterLog(2)
    x = np.array([0.0, 5.0])
    y = np.array([0.0, 0.0])
    on = np.array([True, True])
    for _ in range(50):
        ups, downs = det.update(x, y, on)
        for a, b in ups:
            log.record(a, b)
        assert downs == []
    assert log.total.tolist() == [1, 1]
    assert log.unique[0] == {1}


def test_oscillating_pair_counts_reentries():
    det = ContactDetector(2, range_m=10.0)
    log = EncounterLog(2)
    on = np.array([True, True])
    y = np.array([0.0, 0.0])
    for _ in range(3):
        for x1 in (5.0, 50.0):
            ups, _ = det.update(np.array([0.0, x1]), y, on)
            for a, b in ups:
                log.record(a, b)
    assert log.total.tolist() == [3, 3]
    assert log.unique[0] == {1}
    assert log.unique[1] == {0}


def test_link_set_matches_brute_force():
    rng = random.Random(4)
    n = 20
    xs = np.array([rng.uniform(0, 100) for _ in range(n)])
    ys = np.array([rng.uniform(0, 100) for _ in range(n)])
    on = np.ones(n, dtype=bool)
    det = ContactDetector(n, range_m=25.0)
    ups, downs = det.update(xs, ys, on)
    expected = {
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if math.hypot(xs[i] - xs[j], ys[i] - ys[j]) <= 25.0
    }
    assert set(ups) == expected
    assert downs == []


def test_radio_off_nodes_excluded():
    det = ContactDetector(2, range_m=10.0)
    on = np.array([True, False])
    ups, _ = det.update(np.array([0.0, 1.0]), np.array([0.0, 0.0]), on)
    assert ups == []
    ups, _ = det.update(np.array([0.0, 1.0]), np.array([0.0, 0.0]), np.array([True, True]))
    assert ups == [(0, 1)]


def test_encounter_totals_even():
    log = EncounterLog(4)
    rng = random.Random(8)
    for _ in range(31):
        a, b = rng.sample(range(4), 2)
        log.record(min(a, b), max(a, b))
    assert int(log.total.sum()) % 2 == 0
    for i in range(4):
        assert len(log.unique[i]) <= int(log.total[i])


# -- epidemic link-up exchange ----------------------------------------------------


def test_identical_buffers_produce_empty_queue():
    net = DtnNetwork(3, phy_rate_bps=INF, buffer_bytes=INF)
    net.create_message(msg("m1", 0, 2, created=0.0), 0.0)
    net.link_up(0, 1, 1.0)
    net.advance(1.0)  # replicate m1 to node 1
    net.link_down(0, 1, 2.0)
    link = net.link_up(0, 1, 3.0)  # both now hold m1
    assert len(link.dirs[0]) == 0
    assert len(link.dirs[1]) == 0


def test_destination_priority_order():
    net = DtnNetwork(3, phy_rate_bps=2_000_000.0, buffer_bytes=INF)
    net.create_message(msg("m2", 0, 2, created=0.0), 0.0)  # older, relayed later
    net.create_message(msg("m1", 0, 1, created=5.0), 5.0)  # newer but destined to peer
    link = net.link_up(0, 1, 10.0)
    # the destined-to-peer message starts transferring first despite being newer
    assert link.inflight[1].id == "m1"
    assert list(link.dirs[0].normal) == ["m2"]
    net.advance(11.0)
    assert net.records["m1"].delivered_at == pytest.approx(10.2)
    assert "m2" in net.buffers[1]  # replicated after the direct delivery


def test_link_up_queue_equals_set_difference():
    rng = random.Random(13)
    for _ in range(20):
        net = DtnNetwork(4, phy_rate_bps=2_000_000.0, buffer_bytes=INF)
        held = {0: set(), 1: set()}
        for k in range(rng.randint(0, 10)):
            owner = rng.choice((0, 1))
            mid = f"m{k}"
            net.create_message(msg(mid, owner, rng.choice((2, 3)), created=float(k)), float(k))
            held[owner].add(mid)
        link = net.link_up(0, 1, 100.0)
        queued = {0: set(link.dirs[0].queued), 1: set(link.dirs[1].queued)}
        if link.inflight is not None:
            direction, inflight_msg, _, _ = link.inflight
            queued[direction].add(inflight_msg.id)
        assert queued[0] == held[0] - held[1]
        assert queued[1] == held[1] - held[0]


# -- transfers ---------------------------------------------------------------------


def test_transfer_completes_at_exact_rate():
    # 100,000 bytes at 2 Mbit/s -> 0.4 s of link time
    net = DtnNetwork(2)
    net.create_message(msg("m1", 0, 1, size=100_000, created=0.0), 0.0)
    net.link_up(0, 1, 0.0)
    net.advance(0.39)
    assert "m1" not in net.buffers[1]
    net.advance(0.41)
    assert "m1" in net.buffers[1]
    assert net.records["m1"].delivered_at == pytest.approx(0.4)


def test_link_drop_aborts_without_partial_state():
    net = DtnNetwork(2)
    net.create_message(msg("m1", 0, 1, size=100_000, created=0.0), 0.0)
    net.link_up(0, 1, 0.0)
    net.link_down(0, 1, 0.2)
    net.advance(10.0)
    assert "m1" not in net.buffers[1]
    assert "m1" in net.buffers[0]
    assert net.records["m1"].delivered_at is None


def test_three_messages_complete_in_600ms():
    net = DtnNetwork(2)
    for k in range(3):
        net.create_message(msg(f"m{k}", 0, 1, size=50_000, created=0.0), 0.0)
    net.link_up(0, 1, 0.0)
    net.advance(1.0)  # 1 s contact
    times = [net.records[f"m{k}"].delivered_at for k in range(3)]
    assert times == pytest.approx([0.2, 0.4, 0.6])


def test_half_duplex_alternates_directions():
    net = DtnNetwork(2)
    net.create_message(msg("a1", 0, 1, size=50_000, created=0.0), 0.0)
    net.create_message(msg("a2", 0, 1, size=50_000, created=1.0), 1.0)
    net.create_message(msg("b1", 1, 0, size=50_000, created=2.0), 2.0)
    net.link_up(0, 1, 10.0)
    net.advance(11.0)
    # lower id sends first, then the reverse direction gets its turn
    assert net.records["a1"].delivered_at == pytest.approx(10.2)
    assert net.records["b1"].delivered_at == pytest.approx(10.4)
    assert net.records["a2"].delivered_at == pytest.approx(10.6)


def test_concurrent_links_each_get_full_rate():
    net = DtnNetwork(3)
    net.create_message(msg("m1", 0, 1, size=100_000, created=0.0), 0.0)
    net.create_message(msg("m2", 0, 2, size=100_000, created=0.0), 0.0)
    net.link_up(0, 1, 0.0)
    net.link_up(0, 2, 0.0)
    net.advance(0.5)
    assert net.records["m1"].delivered_at == pytest.approx(0.4)
    assert net.records["m2"].delivered_at == pytest.approx(0.4)


# -- buffers ----------------------------------------------------------------------


def test_admit_empty_buffer():
    buf = Buffer(owner=9)
    admitted, removed = buf.admit(msg("m1", 0, 9), now=0.0, hops=1)
    assert admitted and removed == []
    assert buf.held_bytes == 50_000


def test_full_buffer_evicts_exactly_one_oldest():
    buf = Buffer(owner=9, capacity=20_000_000)
    for k in range(200):  # 200 x 100 KB fills 20 MB exactly
        ok, _ = buf.admit(msg(f"r{k}", 1, 2, size=100_000, created=float(k)), float(k), 1)
        assert ok
    admitted, removed = buf.admit(msg("new", 3, 4, size=100_000, created=300.0), 300.0, 1)
    assert admitted
    assert removed == ["r0"]
    assert buf.held_bytes == 20_000_000


def test_oversize_message_rejected():
    buf = Buffer(owner=9, capacity=20_000_000)
    admitted, removed = buf.admit(msg("big", 0, 1, size=25_000_000), 0.0, 1)
    assert not admitted and removed == []


def test_origin_protection_blocks_eviction():
    buf = Buffer(owner=0, capacity=150_000)
    assert buf.admit(msg("own", 0, 5, size=100_000, created=0.0), 0.0, 0)[0]
    admitted, removed = buf.admit(msg("relay", 3, 4, size=100_000, created=10.0), 10.0, 1)
    assert not admitted and removed == []
    assert "own" in buf
    # relayed holdings are fair game
    buf2 = Buffer(owner=0, capacity=150_000)
    assert buf2.admit(msg("r0", 3, 4, size=100_000, created=0.0), 0.0, 1)[0]
    admitted, removed = buf2.admit(msg("r1", 5, 6, size=100_000, created=10.0), 10.0, 1)
    assert admitted and removed == ["r0"]


def test_expired_dropped_before_eviction():
    buf = Buffer(owner=9, capacity=150_000)
    assert buf.admit(msg("old", 1, 2, size=100_000, created=0.0, ttl=100.0), 0.0, 1)[0]
    admitted, removed = buf.admit(msg("new", 3, 4, size=100_000, created=500.0), 500.0, 1)
    assert admitted
    assert removed == ["old"]


def test_duplicate_admission_refused():
    buf = Buffer(owner=9)
    assert buf.admit(msg("m1", 0, 1), 0.0, 1)[0]
    assert not buf.admit(msg("m1", 0, 1), 1.0, 1)[0]
    assert buf.held_bytes == 50_000


# -- TTL ---------------------------------------------------------------------------


def test_ttl_boundary_kept_and_dropped():
    net = DtnNetwork(2)
    net.create_message(msg("m1", 0, 1, created=0.0, ttl=21_600.0), 0.0)
    net.expire(21_600.0)
    assert "m1" in net.buffers[0]
    net.expire(21_601.0)
    assert "m1" not in net.buffers[0]
    assert net.records["m1"].expired


def test_expiry_matches_filter_oracle():
    rng = random.Random(3)
    net = DtnNetwork(3)
    messages = []
    for k in range(30):
        m = msg(f"m{k}", 0, 1, created=rng.uniform(0, 1000), ttl=rng.uniform(100, 2000))
        messages.append(m)
        net.create_message(m, m.created_at)
    now = 1500.0
    net.expire(now)
    survivors = {m.id for m in messages if now - m.created_at <= m.ttl}
    assert set(net.buffers[0].held) == survivors


def test_expiry_purges_all_replicas():
    net = DtnNetwork(3, phy_rate_bps=INF)
    net.create_message(msg("m1", 0, 2, created=0.0, ttl=100.0), 0.0)
    net.link_up(0, 1, 1.0)
    net.advance(1.0)
    assert "m1" in net.buffers[1]
    net.expire(102.0)
    assert "m1" not in net.buffers[0]
    assert "m1" not in net.buffers[1]
    assert net.records["m1"].holders == set()


# -- traffic -----------------------------------------------------------------------


def test_one_hour_message_count_within_interval_bounds():
    gen = TrafficGenerator(random.Random(42))
    created = gen.step(3600.0, list(range(10)))
    assert 300 <= len(created) <= 450
    assert all(50_000 <= m.size <= 100_000 for m in created)
    assert all(m.source != m.destination for m in created)
    assert all(0.0 < m.created_at <= 3600.0 for m in created)


def test_two_nodes_roughly_balanced_directions():
    gen = TrafficGenerator(random.Random(7))
    created = gen.step(7200.0, [3, 8])
    forward = sum(1 for m in created if m.source == 3)
    assert 0.35 <= forward / len(created) <= 0.65


def test_fewer_than_two_active_skips_but_keeps_cadence():
    gen = TrafficGenerator(random.Random(1))
    assert gen.step(500.0, [4]) == []
    follow_up = gen.step(1000.0, [4, 5])
    assert follow_up  # creation resumes on the old cadence
    assert all(500.0 < m.created_at <= 1000.0 for m in follow_up)


# -- epidemic oracle ----------------------------------------------------------------


def test_epidemic_matches_reachability_closure():
    rng = random.Random(77)
    for _ in range(15):
        n = rng.randint(2, 10)
        events, final = random_trace(rng, n, rng.randint(1, 40), rng.randint(1, 15))
        expected = closure_oracle(events, final)
        net = replay_on_network(events, n, final)
        got = {
            mid: rec.delivered_at
            for mid, rec in net.records.items()
            if rec.delivered_at is not None
        }
        assert set(got) == set(expected)
        for mid, at in got.items():
            assert at == pytest.approx(expected[mid], abs=1e-9)


def test_causality_and_uniqueness_on_random_trace():
    rng = random.Random(123)
    events, final = random_trace(rng, 8, 40, 12)
    net = replay_on_network(events, 8, final)
    for rec in net.records.values():
        if rec.delivered_at is not None:
            assert rec.delivered_at >= rec.message.created_at
            assert rec.delivery_hops >= 1
    assert net.delivered_count == sum(
        1 for r in net.records.values() if r.delivered_at is not None
    )


def test_no_duplicate_holdings_and_buffer_bound():
    rng = random.Random(5)
    net = DtnNetwork(6, phy_rate_bps=2_000_000.0, buffer_bytes=300_000)
    t = 0.0
    live = set()
    for k in range(300):
        t += rng.uniform(0.2, 2.0)
        net.advance(t)
        action = rng.random()
        if action < 0.4:
            a, b = rng.sample(range(6), 2)
            key = (min(a, b), max(a, b))
            if key in live:
                net.link_down(*key, t)
                live.discard(key)
            else:
                net.link_up(*key, t)
                live.add(key)
        else:
            src, dst = rng.sample(range(6), 2)
            net.create_message(msg(f"m{k}", src, dst, rng.randint(50_000, 100_000), t), t)
        net.expire(t)
        for buf in net.buffers:
            assert buf.held_bytes <= 300_000
            assert buf.held_bytes == sum(c.message.size for c in buf.held.values())
    for mid, rec in net.records.items():
        for node in rec.holders:
            assert mid in net.buffers[node]


# -- trace parsing ------------------------------------------------------------------


def test_parse_contact_trace():
    text = "# comment\n0.5 UP 1 2\n3.25 DOWN 1 2\n"
    assert parse_contact_trace(text) == [(0.5, "UP", 1, 2), (3.25, "DOWN", 1, 2)]
    with pytest.raises(ValueError, match="line 1"):
        parse_contact_trace("1.0 SIDEWAYS 1 2")
