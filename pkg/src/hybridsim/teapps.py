"""Traffic generation and the three traffic-engineering applications.

* ecmp-srcdst: BGP router fabric; multipath forwarding hashes source and
  destination addresses only.
* ecmp-5tuple: SDN switch fabric; an in-process controller installs
  prefix entries with ECMP groups hashing the full 5-tuple.
* hedera: 5-tuple ECMP baseline plus a periodic scheduler that polls
  switch statistics, estimates flow demands, and pins elephant flows to
  up-down paths chosen by Global First Fit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import topology as tp
from .controlplane import (FLOW_MOD, STATS_REPLY, STATS_REQUEST, BgpSpeaker,
                           ConnectionManager, SdnMessage, open_bgp_session)
from .dataplane import (HASH_5TUPLE, HASH_SRCDST, Action, FlowKey, Match,
                        Network, output)
from .engine import FLOW_START, SEC, STATS_POLL, Engine
from .errors import TooFewHosts

UDP = 17
DEFAULT_DST_PORT = 5001


@dataclass
class TrafficPattern:
    seed: int
    demand: float                     # bits/s per flow
    start: int                        # virtual ns
    assignment: dict = field(default_factory=dict)   # src host -> dst host
    keys: dict = field(default_factory=dict)         # src host -> FlowKey


def gen_permutation_traffic(hosts: list, topo: tp.Topology, seed: int,
                            demand: float, start: int) -> TrafficPattern:
    """Seeded derangement: every host sends one flow, receives one flow.

    Fisher-Yates shuffles are rejection-sampled until no host maps to
    itself; source ports are then drawn from the same stream in host
    order, so the whole pattern is a pure function of the seed.
    """
    if len(hosts) < 2:
        raise TooFewHosts("need at least 2 hosts")
    hosts = sorted(hosts)
    rng = random.Random(seed)
    while True:
        targets = list(hosts)
        rng.shuffle(targets)
        if all(h != t for h, t in zip(hosts, targets)):
            break
    pattern = TrafficPattern(seed, demand, start,
                             assignment=dict(zip(hosts, targets)))
    for h in hosts:
        key = FlowKey(topo.nodes[h].addr, topo.nodes[pattern.assignment[h]].addr,
                      UDP, rng.randint(1024, 65535), DEFAULT_DST_PORT)
        pattern.keys[h] = key
    return pattern


def schedule_flows(network: Network, pattern: TrafficPattern):
    for h in sorted(pattern.keys):
        key = pattern.keys[h]
        network.engine.schedule(
            pattern.start, FLOW_START,
            lambda t, k=key: network.start_flow(k, pattern.demand, t))


# -- BGP + src/dst ECMP ----------------------------------------------------

def setup_bgp_fabric(topo: tp.Topology, network: Network, engine: Engine,
                     cm: ConnectionManager, mrai: int,
                     hash_variant: str = HASH_SRCDST) -> dict:
    """One BGP speaker per router; edge routers originate their /24 and
    hold direct /32 routes to their hosts. Sessions open at t=0."""
    speakers = {}
    for r in topo.routers():
        speakers[r] = BgpSpeaker(r, topo, network, cm, engine,
                                 mrai=mrai, hash_variant=hash_variant)
    for r in topo.routers():
        node = topo.nodes[r]
        for port in sorted(topo.ports[r]):
            peer, _ = topo.neighbor(r, port)
            if topo.nodes[peer].kind == tp.HOST:
                addr = topo.nodes[peer].addr
                network.install_route(r, addr, 32, output(port))
        if node.layer in (None, tp.LAYER_EDGE):
            # edge of a fat-tree, or any router with attached hosts
            local_hosts = [topo.neighbor(r, p)[0] for p in sorted(topo.ports[r])
                           if topo.nodes[topo.neighbor(r, p)[0]].kind == tp.HOST]
            if local_hosts:
                addr = topo.nodes[local_hosts[0]].addr
                prefix = addr & 0xFFFFFF00
                speakers[r].originate(prefix, 24)
    opened = set()
    for r in sorted(speakers):
        for port in sorted(topo.ports[r]):
            peer, _ = topo.neighbor(r, port)
            if peer in speakers and (peer, r) not in opened:
                opened.add((r, peer))
                open_bgp_session(speakers[r], speakers[peer], 0)
    return speakers


# -- SDN fabrics -------------------------------------------------------------

CONTROLLER = "controller"


class SdnEcmpController:
    """Installs static fat-tree forwarding with upward ECMP groups."""

    def __init__(self, topo: tp.Topology, network: Network, engine: Engine,
                 cm: ConnectionManager, hash_variant: str = HASH_5TUPLE):
        self.topo = topo
        self.network = network
        self.engine = engine
        self.cm = cm
        self.hash_variant = hash_variant
        cm.register(CONTROLLER, self.handle_message)

    def handle_message(self, msg: SdnMessage, src: str, at: int):
        pass  # base controller has no reactive logic

    def install_baseline(self, at: int = 0):
        for sw in self.topo.switches():
            for mod in self._mods_for(sw):
                self.cm.send(CONTROLLER, sw, mod, at)

    def install_direct(self):
        """Apply the baseline tables without control messages (no FTI).

        Used for pure data-plane runs that measure DES speed.
        """
        for sw in self.topo.switches():
            for mod in self._mods_for(sw):
                self.network.apply_flow_mod(sw, mod.priority, mod.match, mod.action)

    def _mods_for(self, sw: str) -> list:
        topo = self.topo
        node = topo.nodes[sw]
        mods = []
        if node.layer == tp.LAYER_EDGE:
            for port in sorted(topo.ports[sw]):
                peer, _ = topo.neighbor(sw, port)
                if topo.nodes[peer].kind == tp.HOST:
                    mods.append(SdnMessage(
                        FLOW_MOD, priority=20,
                        match=Match(dst_prefix=(topo.nodes[peer].addr, 32)),
                        action=output(port)))
            ups = tuple(topo.up_ports(sw))
            mods.append(SdnMessage(FLOW_MOD, priority=1,
                                   match=Match(dst_prefix=(0, 0)),
                                   action=Action(ups, self.hash_variant)))
        elif node.layer == tp.LAYER_AGG:
            half = topo.fat_tree_k // 2
            for e in range(half):
                prefix, length = tp.edge_subnet(node.pod, e)
                port = topo.port_toward(sw, tp.edge_name(node.pod, e))
                mods.append(SdnMessage(FLOW_MOD, priority=10,
                                       match=Match(dst_prefix=(prefix, length)),
                                       action=output(port)))
            ups = tuple(topo.up_ports(sw))
            mods.append(SdnMessage(FLOW_MOD, priority=1,
                                   match=Match(dst_prefix=(0, 0)),
                                   action=Action(ups, self.hash_variant)))
        else:  # core
            for pod in range(topo.fat_tree_k):
                prefix, length = tp.pod_subnet(pod)
                agg = tp.agg_name(pod, node.index // (topo.fat_tree_k // 2))
                port = topo.port_toward(sw, agg)
                mods.append(SdnMessage(FLOW_MOD, priority=10,
                                       match=Match(dst_prefix=(prefix, length)),
                                       action=output(port)))
        return mods


# -- Hedera-style scheduler -----------------------------------------------------

@dataclass
class HederaConfig:
    poll_interval: int = 5 * SEC
    elephant_threshold: float = 0.1   # fraction of host link capacity
    use_demand_estimation: bool = True

    def validate(self):
        if not (0 < self.elephant_threshold <= 1):
            raise ValueError("elephant_threshold must be in (0, 1]")
        if self.poll_interval <= 0:
            raise ValueError("poll_interval must be positive")


def demand_estimate(flows: list, host_capacity: float) -> dict:
    """Iterative sender-fair / receiver-limited natural-demand estimation.

    flows: list of (key, src_host, dst_host, demand) where demand caps a
    flow's estimate (pass the host capacity when the true offered rate is
    unknown). Returns key -> estimated bits/s.
    """
    est = {key: 0.0 for key, _, _, _ in flows}
    dem = {key: demand for key, _, _, demand in flows}
    converged = {key: False for key, _, _, _ in flows}
    by_src: dict = {}
    by_dst: dict = {}
    for key, src, dst, _ in flows:
        by_src.setdefault(src, []).append(key)
        by_dst.setdefault(dst, []).append(key)
    for _ in range(len(flows) + 2):
        changed = False
        # sender phase: water-fill the sender capacity over unconverged
        # flows, capping each at its offered demand
        for src in sorted(by_src):
            keys = by_src[src]
            fixed = sum(est[k] for k in keys if converged[k])
            active = [k for k in keys if not converged[k]]
            used = 0.0
            while active:
                share = max(host_capacity - fixed - used, 0.0) / len(active)
                capped = [k for k in active if dem[k] <= share + 1e-9]
                if not capped:
                    for k in active:
                        if est[k] != share:
                            est[k] = share
                            changed = True
                    break
                for k in capped:
                    if est[k] != dem[k]:
                        est[k] = dem[k]
                        changed = True
                    used += dem[k]
                active = [k for k in active if k not in capped]
        # receiver phase: water-fill oversubscribed receivers; flows below
        # the equal share are sender-limited and keep their estimate
        for dst in sorted(by_dst):
            keys = by_dst[dst]
            if sum(est[k] for k in keys) <= host_capacity + 1e-9:
                continue
            active = list(keys)
            fixed = 0.0
            while active:
                share = (host_capacity - fixed) / len(active)
                small = [k for k in active if est[k] < share - 1e-9]
                if not small:
                    for k in active:
                        if not converged[k] or est[k] != share:
                            changed = True
                        est[k] = share
                        converged[k] = True
                    break
                fixed += sum(est[k] for k in small)
                active = [k for k in active if k not in small]
        if not changed:
            break
    return est


class HederaScheduler(SdnEcmpController):
    """5-tuple ECMP baseline plus periodic elephant re-placement."""

    def __init__(self, topo, network, engine, cm, config: HederaConfig,
                 host_capacity: float, hash_variant: str = HASH_5TUPLE):
        super().__init__(topo, network, engine, cm, hash_variant)
        config.validate()
        self.config = config
        self.host_capacity = host_capacity
        self.pinned: dict = {}          # FlowKey -> node path
        self._outstanding = 0
        self._poll_stats: dict = {}     # FlowKey -> (src, dst)

    def schedule_polls(self, first: int, end: int):
        t = first
        while t <= end:
            self.engine.schedule(t, STATS_POLL, self._poll)
            t += self.config.poll_interval

    def _poll(self, now: int):
        edges = [sw for sw in self.topo.switches()
                 if self.topo.nodes[sw].layer == tp.LAYER_EDGE]
        self._outstanding = len(edges)
        self._poll_stats = {}
        for sw in edges:
            self.cm.send(CONTROLLER, sw, SdnMessage(STATS_REQUEST), now)

    def handle_message(self, msg: SdnMessage, src: str, at: int):
        if msg.kind != STATS_REPLY:
            return
        for key, rate, nbytes in msg.stats:
            if key not in self._poll_stats:
                src_host = self.topo.host_by_addr.get(key.src_ip)
                dst_host = self.topo.host_by_addr.get(key.dst_ip)
                if src_host and dst_host:
                    self._poll_stats[key] = (src_host, dst_host, rate)
        self._outstanding -= 1
        if self._outstanding == 0:
            self._place(at)

    def _place(self, now: int):
        # true offered demand is unknown at the controller; cap estimates
        # at the host NIC rate
        flows = [(key, src, dst, self.host_capacity) for key, (src, dst, _) in
                 sorted(self._poll_stats.items())]
        if not flows:
            return
        if self.config.use_demand_estimation:
            demand = demand_estimate(flows, self.host_capacity)
        else:
            demand = {key: rate for key, (_, _, rate) in self._poll_stats.items()}
        flows = [(key, src, dst) for key, src, dst, _ in flows]
        threshold = self.config.elephant_threshold * self.host_capacity
        reserved: dict = {}

        def fits(links, need):
            return all(self.topo.capacity[l] - reserved.get(l, 0.0) >= need - 1e-6
                       for l in links)

        def reserve(links, need):
            for l in links:
                reserved[l] = reserved.get(l, 0.0) + need

        for key, src, dst in flows:
            need = demand[key]
            if need < threshold:
                continue
            current = self.network.flows[key].path
            placed = False
            for node_path in tp.shortest_paths_up_down(self.topo, src, dst):
                links = tp.path_links(self.topo, node_path)
                if fits(links, need):
                    reserve(links, need)
                    if self.pinned.get(key) != node_path:
                        self._pin(key, node_path, now)
                        self.pinned[key] = node_path
                    placed = True
                    break
            if not placed:
                reserve(current, need)  # keep its current path reserved

    def _pin(self, key: FlowKey, node_path: list, now: int):
        # exact-match entries on the switches where an upward choice exists
        for i, node in enumerate(node_path[1:-1], start=1):
            if self.topo.nodes[node].kind == tp.HOST:
                continue
            port = self.topo.port_toward(node, node_path[i + 1])
            self.cm.send(CONTROLLER, node,
                         SdnMessage(FLOW_MOD, priority=100,
                                    match=Match(exact=key),
                                    action=output(port)), now)
