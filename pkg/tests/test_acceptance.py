"""Acceptance suite: one test per headline requirement.

Each test prints a single PASS line with the measured numbers so a
plain ``pytest -s tests/test_acceptance.py`` run reads as a checklist.
"""

import random
import time

import pytest

from hybridsim import topology as tp
from hybridsim.controlplane import (ESTABLISHED, BgpSpeaker, ConnectionManager,
                                    SwitchAgent, open_bgp_session)
from hybridsim.dataplane import FlowKey, Network, compute_rates, output
from hybridsim.engine import (CONTROL_DELIVERY, MODE_DES, MODE_FTI, MS, SEC,
                              Engine)
from hybridsim.experiment import ExperimentSpec, run_experiment
from hybridsim.teapps import (HederaConfig, HederaScheduler, SdnEcmpController,
                              TrafficPattern, gen_permutation_traffic,
                              schedule_flows)

from oracles import (count_fat_tree_by_definition, interval_union,
                     progressive_fill_oracle)

G = 1e9


def test_acceptance_fat_tree_structure():
    t0 = time.perf_counter()
    for k, want_hosts in ((4, 16), (6, 54), (8, 128)):
        topo = tp.build_fat_tree(tp.FatTreeParams(k))
        hosts = len(topo.hosts())
        switches = len(topo.switches())
        cables = sum(len(p) for p in topo.ports.values()) // 2
        oh, oc, oa, oe, ocab = count_fat_tree_by_definition(k)
        assert hosts == want_hosts == oh
        assert switches == oc + oa + oe
        assert cables == ocab
        if k == 4:
            assert (hosts, switches, cables) == (16, 20, 48)
    elapsed = time.perf_counter() - t0
    assert elapsed < 1.0
    print(f"\nPASS fat-tree structure: k=4 (16,20,48), k=6/8 host counts "
          f"match the definitional constructor in {elapsed:.3f}s")


def pod_rotation_pattern(topo):
    """Collision-free hand assignment: host (p,e,i) sends to (p+1,e,i)."""
    k = topo.fat_tree_k
    half = k // 2
    pat = TrafficPattern(seed=0, demand=G, start=5 * SEC)
    sport = 10000
    for p in range(k):
        for e in range(half):
            for i in range(half):
                src = tp.host_name(p, e, i)
                dst = tp.host_name((p + 1) % k, e, i)
                pat.assignment[src] = dst
                pat.keys[src] = FlowKey(topo.nodes[src].addr,
                                        topo.nodes[dst].addr, 17, sport, 5001)
                sport += 1
    return pat


def test_acceptance_offered_load_bound_and_collision_free_hedera():
    # part 1: sampled aggregate never exceeds the 16 Gbps offered load
    worst = 0.0
    for app in ("ecmp-srcdst", "ecmp-5tuple", "hedera"):
        rep = run_experiment(ExperimentSpec(te_app=app, k=4, seed=3,
                                            traffic_start=5 * SEC,
                                            end=20 * SEC))
        for rec in rep.series:
            assert rec.aggregate <= 16 * G * (1 + 1e-9)
            worst = max(worst, rec.aggregate)

    # part 2: hedera on a hand-built collision-free derangement reaches
    # the full offered load once every elephant is pinned
    topo = tp.build_fat_tree(tp.FatTreeParams(4))
    engine = Engine(pace=False)
    net = Network(topo, engine)
    cm = ConnectionManager(engine)
    for sw in topo.switches():
        SwitchAgent(sw, net, cm)
    sched = HederaScheduler(topo, net, engine, cm, HederaConfig(),
                            host_capacity=G)
    sched.install_baseline(0)
    sched.schedule_polls(10 * SEC, 30 * SEC)
    schedule_flows(net, pod_rotation_pattern(topo))
    engine.schedule(25 * SEC, "MeasurementSample", net.sample_measurements)
    engine.run(30 * SEC)
    final = net.series[-1].aggregate
    assert final == pytest.approx(16 * G, rel=1e-9)
    print(f"\nPASS offered-load bound: max sampled aggregate {worst / G:.3f} "
          f"<= 16 Gbps across all apps; collision-free hedera placement "
          f"reaches {final / G:.9f} Gbps")


def random_ratesharing_instance(rng):
    n_links = rng.randrange(1, 7)
    n_flows = rng.randrange(1, 7)
    caps = {f"l{i}": rng.uniform(0.1, 2.0) * G for i in range(n_links)}
    demands, paths = {}, {}
    for f in range(n_flows):
        k = f"f{f}"
        demands[k] = rng.uniform(0.05, 1.5) * G
        paths[k] = rng.sample(sorted(caps), rng.randrange(1, n_links + 1))
    return demands, paths, caps


def test_acceptance_max_min_oracle():
    rng = random.Random(7)
    t0 = time.perf_counter()
    for _ in range(200):
        demands, paths, caps = random_ratesharing_instance(rng)
        got = compute_rates(demands, paths, caps)
        want = progressive_fill_oracle(demands, paths, caps)
        for k in demands:
            assert got[k] == pytest.approx(want[k], rel=1e-9, abs=1e-3)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    print(f"\nPASS max-min oracle: 200 random instances match progressive "
          f"filling within 1e-9 relative in {elapsed:.2f}s")


def test_acceptance_mode_automaton():
    rng = random.Random(31)
    for trial in range(100):
        timeout = rng.randrange(1, 20) * 100 * MS
        times = sorted(rng.sample(range(0, 30 * SEC, 50 * MS),
                                  rng.randrange(1, 12)))
        end = times[-1] + timeout + 3 * SEC
        engine = Engine(quiescence_timeout=timeout, pace=False)
        for t in times:
            engine.schedule(t, CONTROL_DELIVERY,
                            lambda now: engine.notify_control_activity(now))
        rep = engine.run(end)
        assert rep.fti_intervals(end) == interval_union(times, timeout, end), \
            (trial, times, timeout)
    print("\nPASS mode automaton: 100 random activity schedules match the "
          "interval-union oracle exactly")


def test_acceptance_fti_pacing_and_des_speed():
    # one paced FTI phase covering 2 s of virtual time
    engine = Engine(pace=True)
    engine.schedule(0, CONTROL_DELIVERY,
                    lambda now: engine.notify_control_activity(now))
    rep = engine.run(3 * SEC)
    walls = rep.fti_phase_walls()
    assert len(walls) == 1
    assert 2.0 <= walls[0] <= 2.2, walls

    # pure data plane: 60 s virtual with 16 flows, no control traffic
    topo = tp.build_fat_tree(tp.FatTreeParams(4))
    engine2 = Engine(pace=False)
    net = Network(topo, engine2)
    cm = ConnectionManager(engine2)
    SdnEcmpController(topo, net, engine2, cm).install_direct()
    pat = gen_permutation_traffic(topo.hosts(), topo, seed=1, demand=G, start=0)
    schedule_flows(net, pat)
    t = 0
    while t <= 60 * SEC:
        engine2.schedule(t, "MeasurementSample", net.sample_measurements)
        t += 100 * MS
    t0 = time.perf_counter()
    rep2 = engine2.run(60 * SEC)
    wall = time.perf_counter() - t0
    assert rep2.mode_trace == [(0, MODE_DES)]  # never left DES
    assert wall < 6.0
    print(f"\nPASS fti pacing and des speed: 2 s FTI phase took "
          f"{walls[0]:.4f}s wall (within [2.0, 2.2]); 60 s data-plane run "
          f"took {wall:.3f}s wall (< 6 s)")


def test_acceptance_two_router_scenario():
    topo = tp.build_two_routers()
    engine = Engine(pace=False)
    net = Network(topo, engine)
    cm = ConnectionManager(engine)
    s1 = BgpSpeaker("r1", topo, net, cm, engine)
    s2 = BgpSpeaker("r2", topo, net, cm, engine)
    s1.originate(tp.ip(10, 1, 0, 0), 24)
    s2.originate(tp.ip(10, 2, 0, 0), 24)
    net.install_route("r1", tp.ip(10, 1, 0, 2), 32, output(0))
    net.install_route("r2", tp.ip(10, 2, 0, 2), 32, output(0))
    open_bgp_session(s1, s2, 0)
    key = FlowKey(tp.ip(10, 1, 0, 2), tp.ip(10, 2, 0, 2), 17, 40000, 5001)
    engine.schedule(5 * SEC, "FlowStart", lambda t: net.start_flow(key, G, t))
    rep = engine.run(10 * SEC)
    assert s1.sessions["r2"] == ESTABLISHED
    assert (tp.ip(10, 2, 0, 0), 24) in s1.rib
    assert (tp.ip(10, 1, 0, 0), 24) in s2.rib
    assert net.lookup_next_hop("r1", key) == topo.port_toward("r1", "r2")
    modes = [m for _, m in rep.mode_trace]
    assert modes == [MODE_DES, MODE_FTI, MODE_DES]
    assert net.flows[key].allocated == pytest.approx(G, rel=1e-9)
    print("\nPASS two-router scenario: peer prefixes in both RIBs, FIBs "
          "installed, mode trace DES-FTI-DES, flow at 1 Gbps after "
          "convergence")


def test_acceptance_hedera_polling_cadence():
    rep = run_experiment(ExperimentSpec(te_app="hedera", k=4, seed=1,
                                        traffic_start=5 * SEC, end=30 * SEC))
    intervals = rep.engine.fti_intervals()
    polls = [10, 15, 20, 25]
    for poll in polls:
        t = poll * SEC
        assert any(lo <= t + SEC // 2 and hi > t for lo, hi in intervals), poll
    print(f"\nPASS hedera polling cadence: FTI activity present at every "
          f"5 s multiple during traffic ({polls})")


def test_acceptance_te_ordering():
    t0 = time.perf_counter()
    means = {}
    for app in ("ecmp-srcdst", "ecmp-5tuple", "hedera"):
        vals = []
        for seed in range(20):
            rep = run_experiment(ExperimentSpec(
                te_app=app, k=4, seed=seed,
                traffic_start=5 * SEC, end=30 * SEC))
            vals.append(rep.steady_mean_aggregate())
        means[app] = sum(vals) / len(vals)
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    assert means["hedera"] >= means["ecmp-5tuple"] - 1e-6
    assert means["ecmp-5tuple"] >= means["ecmp-srcdst"] - 1e-6
    print(f"\nPASS te ordering over 20 seeds: hedera "
          f"{means['hedera'] / G:.2f} >= ecmp-5tuple "
          f"{means['ecmp-5tuple'] / G:.2f} >= ecmp-srcdst "
          f"{means['ecmp-srcdst'] / G:.2f} Gbps in {elapsed:.1f}s")
