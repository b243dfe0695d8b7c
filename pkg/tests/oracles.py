"""Independent oracles used by the test suite.

These deliberately avoid the production code paths they check.
"""

from __future__ import annotations


def progressive_fill_oracle(demands, paths, capacities):
    """Max-min fair allocation by uniform progressive filling.

    All unfrozen flows rise together; at each step the limiting
    constraint (a flow hitting its demand or a link saturating) is found
    analytically and the flows it binds are frozen. Distinct from the
    production bottleneck-freezing implementation.
    """
    alloc = {k: 0.0 for k in demands}
    residual = dict(capacities)
    link_flows = {lid: [k for k, p in paths.items() if lid in set(p)]
                  for lid in capacities}
    unfrozen = set(k for k in demands if demands[k] > 0)
    for k in demands:
        if demands[k] <= 0:
            alloc[k] = 0.0
    while unfrozen:
        # largest uniform increment delta feasible for every constraint
        delta = min(demands[k] - alloc[k] for k in unfrozen)
        for lid, flows in link_flows.items():
            n = sum(1 for f in flows if f in unfrozen)
            if n:
                delta = min(delta, residual[lid] / n)
        delta = max(delta, 0.0)
        for k in unfrozen:
            alloc[k] += delta
        for lid, flows in link_flows.items():
            n = sum(1 for f in flows if f in unfrozen)
            residual[lid] -= delta * n
        frozen = set()
        for k in unfrozen:
            if alloc[k] >= demands[k] - 1e-12 * max(demands[k], 1.0):
                frozen.add(k)
        for lid, flows in link_flows.items():
            if residual[lid] <= 1e-12 * max(capacities[lid], 1.0):
                frozen.update(f for f in flows if f in unfrozen)
        if not frozen:
            break
        unfrozen -= frozen
    return alloc


def fnv1a64_reference(data: bytes) -> int:
    """Textbook FNV-1a, written independently of the production code."""
    h = 14695981039346656037
    for byte in data:
        h = ((h ^ byte) * 1099511628211) % (1 << 64)
    return h


def interval_union(activity_times, timeout, end):
    """Closed-form FTI intervals: union of [t, t+timeout) clipped to [0, end)."""
    intervals = sorted((t, min(t + timeout, end)) for t in activity_times
                       if t < end)
    merged = []
    for lo, hi in intervals:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return [(lo, hi) for lo, hi in merged if hi > lo]


def count_fat_tree_by_definition(k: int):
    """Wire a fat-tree from the textbook definition and count pieces.

    Returns (hosts, core, aggregation, edge, cables). Uses plain
    adjacency sets, independent of the production constructor.
    """
    half = k // 2
    edges = set()

    def cable(a, b):
        edges.add(frozenset((a, b)))

    hosts = []
    core = [("core", i) for i in range(half * half)]
    agg = []
    edge = []
    for p in range(k):
        for s in range(half):
            agg.append(("agg", p, s))
            edge.append(("edge", p, s))
    for p in range(k):
        for e in range(half):
            for h in range(half):
                host = ("host", p, e, h)
                hosts.append(host)
                cable(host, ("edge", p, e))
            for a in range(half):
                cable(("edge", p, e), ("agg", p, a))
        for a in range(half):
            for j in range(half):
                cable(("agg", p, a), ("core", a * half + j))
    return len(hosts), len(core), len(agg), len(edge), len(edges)
