"""Fluid-rate data plane.

Flows are 5-tuples with a constant demand; allocated rates come from a
demand-capped max-min fair share (progressive filling) over the
capacitated directed links of their paths. Forwarding state is a
longest-prefix-match FIB on routers and a priority-ordered match table
on switches; multipath entries pick a port with a pinned FNV-1a hash so
results are stable across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import topology as topo_mod
from .engine import RATE_RECOMPUTE, SEC
from .errors import (DuplicateFlow, InvalidPath, NoRoute, RoutingLoop,
                     UnknownFlow, UnknownPort, UnknownSwitch)
from .topology import HOST, link_id

HASH_SRCDST = "srcdst"
HASH_5TUPLE = "5tuple"


@dataclass(frozen=True, order=True)
class FlowKey:
    src_ip: int
    dst_ip: int
    ip_proto: int
    src_port: int
    dst_port: int


@dataclass
class Flow:
    key: FlowKey
    demand: float             # bits/s
    allocated: float = 0.0    # bits/s
    path: list = field(default_factory=list)  # directed link ids
    src_host: str = ""
    dst_host: str = ""
    started_at: int = 0


# -- ECMP hashing -------------------------------------------------------

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = FNV64_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV64_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def hash_fields(key: FlowKey, variant: str) -> bytes:
    """Canonical big-endian encoding of the hashed header fields."""
    if variant == HASH_SRCDST:
        return key.src_ip.to_bytes(4, "big") + key.dst_ip.to_bytes(4, "big")
    if variant == HASH_5TUPLE:
        return (key.src_ip.to_bytes(4, "big") + key.dst_ip.to_bytes(4, "big")
                + key.ip_proto.to_bytes(1, "big")
                + key.src_port.to_bytes(2, "big")
                + key.dst_port.to_bytes(2, "big"))
    raise ValueError(f"unknown hash variant {variant!r}")


def ecmp_hash(fields: bytes, n: int) -> int:
    if n < 1:
        raise ValueError("n must be >= 1")
    return fnv1a64(fields) % n


# -- forwarding state ---------------------------------------------------

@dataclass
class Action:
    """Egress action: a single port or an ECMP group of ports."""
    ports: tuple
    hash_variant: str = HASH_SRCDST

    def select(self, key: FlowKey) -> int:
        if len(self.ports) == 1:
            return self.ports[0]
        idx = ecmp_hash(hash_fields(key, self.hash_variant), len(self.ports))
        return self.ports[idx]


def output(port: int) -> Action:
    return Action((port,))


@dataclass
class FibEntry:
    prefix: int
    length: int
    action: Action

    def matches(self, addr: int) -> bool:
        if self.length == 0:
            return True
        shift = 32 - self.length
        return (addr >> shift) == (self.prefix >> shift)


@dataclass
class Match:
    """Flow-table match: dst prefix and/or exact 5-tuple."""
    dst_prefix: tuple | None = None   # (prefix, length)
    exact: FlowKey | None = None

    def matches(self, key: FlowKey) -> bool:
        if self.exact is not None:
            return key == self.exact
        if self.dst_prefix is not None:
            prefix, length = self.dst_prefix
            if length == 0:
                return True
            shift = 32 - length
            return (key.dst_ip >> shift) == (prefix >> shift)
        return True


@dataclass
class TableEntry:
    priority: int
    match: Match
    action: Action
    order: int = 0  # insertion order, tie-break under equal priority


@dataclass
class MeasurementRecord:
    time: int                                   # virtual ns
    arrivals: dict                              # host -> bits/s
    aggregate: float
    link_utilization: dict                      # link id -> fraction of capacity


# -- max-min fair sharing ------------------------------------------------

def compute_rates(demands: dict, paths: dict, capacities: dict) -> dict:
    """Demand-capped max-min fair allocation by bottleneck freezing.

    demands: key -> bits/s; paths: key -> list of directed link ids;
    capacities: link id -> bits/s. Returns key -> allocated bits/s.

    Each iteration finds the links with the smallest fair share among
    their unfrozen flows and freezes those flows at that level; demand
    caps are expressed as a private virtual link per flow.
    """
    for key, path in paths.items():
        for lid in path:
            if lid not in capacities:
                raise InvalidPath(f"flow {key} references unknown link {lid}")
    alloc = {key: 0.0 for key in demands}
    residual = {}
    orig = {}
    members: dict = {}
    for key, path in paths.items():
        for lid in set(path):
            if lid not in members:
                members[lid] = set()
                residual[lid] = capacities[lid]
                orig[lid] = capacities[lid]
            members[lid].add(key)
        # virtual demand link, carries only this flow
        vlid = ("demand", key)
        residual[vlid] = demands[key]
        orig[vlid] = max(demands[key], 1.0)
        members[vlid] = {key}
    unfrozen = set(demands)
    while unfrozen:
        share = None
        for lid, flows in members.items():
            n = sum(1 for f in flows if f in unfrozen)
            if n == 0:
                continue
            s = residual[lid] / n
            if share is None or s < share:
                share = s
        if share is None:
            break
        share = max(share, 0.0)
        for f in unfrozen:
            alloc[f] += share
        saturated = []
        for lid, flows in members.items():
            n = sum(1 for f in flows if f in unfrozen)
            if n == 0:
                continue
            residual[lid] -= share * n
            if residual[lid] <= 1e-12 * orig[lid]:
                saturated.append(lid)
        newly = set()
        for lid in saturated:
            newly |= {f for f in members[lid] if f in unfrozen}
        if not newly:
            break
        unfrozen -= newly
    return alloc


# -- the network ----------------------------------------------------------

class Network:
    """Data-plane state: forwarding tables, active flows, measurements.

    Owned and mutated exclusively by the engine loop.
    """

    def __init__(self, topo, engine, default_hash_variant: str = HASH_5TUPLE):
        self.topo = topo
        self.engine = engine
        self.default_hash_variant = default_hash_variant
        self.flows: dict[FlowKey, Flow] = {}
        self.fib: dict[str, list] = {}       # router -> [FibEntry]
        self.tables: dict[str, list] = {}    # switch -> [TableEntry]
        self._table_order = 0
        self.series: list[MeasurementRecord] = []
        self._pending_recompute: set[int] = set()
        self._bytes: dict[FlowKey, float] = {}
        self._last_rate_change: int = 0

    # -- forwarding -----------------------------------------------------

    def install_route(self, router: str, prefix: int, length: int,
                      action: Action, now: int | None = None):
        if router not in self.topo.nodes:
            raise UnknownPort(f"unknown router {router}")
        for p in action.ports:
            if p not in self.topo.ports[router]:
                raise UnknownPort(f"router {router} has no port {p}")
        entries = self.fib.setdefault(router, [])
        for e in entries:
            if e.prefix == prefix and e.length == length:
                e.action = action
                break
        else:
            entries.append(FibEntry(prefix, length, action))
        if now is not None:
            self.schedule_recompute(now)

    def remove_route(self, router: str, prefix: int, length: int,
                     now: int | None = None):
        entries = self.fib.get(router, [])
        self.fib[router] = [e for e in entries
                            if not (e.prefix == prefix and e.length == length)]
        if now is not None:
            self.schedule_recompute(now)

    def apply_flow_mod(self, switch: str, priority: int, match: Match,
                       action: Action, now: int | None = None):
        if switch not in self.topo.nodes:
            raise UnknownSwitch(f"unknown switch {switch}")
        for p in action.ports:
            if p not in self.topo.ports[switch]:
                raise UnknownPort(f"switch {switch} has no port {p}")
        table = self.tables.setdefault(switch, [])
        for e in table:
            if e.priority == priority and e.match == match:
                e.action = action
                break
        else:
            table.append(TableEntry(priority, match, action, self._table_order))
            self._table_order += 1
            table.sort(key=lambda e: (-e.priority, e.order))
        if now is not None:
            self.schedule_recompute(now)

    def lookup_next_hop(self, node: str, key: FlowKey) -> int:
        nd = self.topo.nodes[node]
        if nd.kind == HOST:
            return 0  # hosts have a single uplink
        if nd.kind == topo_mod.ROUTER:
            best = None
            for e in self.fib.get(node, []):
                if e.matches(key.dst_ip) and (best is None or e.length > best.length):
                    best = e
            if best is None:
                raise NoRoute(f"no FIB entry on {node} for {topo_mod.ip_str(key.dst_ip)}")
            return best.action.select(key)
        for e in self.tables.get(node, []):
            if e.match.matches(key):
                return e.action.select(key)
        raise NoRoute(f"no table entry on {node} for {key}")

    def compute_path(self, key: FlowKey) -> tuple[list, str, str]:
        """Walk the forwarding state; returns (link ids, src host, dst host)."""
        try:
            src = self.topo.host_by_addr[key.src_ip]
            dst = self.topo.host_by_addr[key.dst_ip]
        except KeyError as exc:
            raise NoRoute(f"unknown host address {exc}") from exc
        node = src
        links = []
        visited = {node}
        while node != dst:
            port = self.lookup_next_hop(node, key)
            links.append(link_id(node, port))
            node, _ = self.topo.neighbor(node, port)
            if node in visited:
                raise RoutingLoop(f"loop at {node} for {key}")
            visited.add(node)
        return links, src, dst

    # -- flow lifecycle ---------------------------------------------------

    def start_flow(self, key: FlowKey, demand: float, at: int):
        if key in self.flows:
            raise DuplicateFlow(f"flow {key} already active")
        path, src, dst = self.compute_path(key)
        self.flows[key] = Flow(key, demand, 0.0, path, src, dst, at)
        self._bytes[key] = 0.0
        self.schedule_recompute(at)

    def stop_flow(self, key: FlowKey, at: int):
        if key not in self.flows:
            raise UnknownFlow(f"flow {key} not active")
        self._settle_bytes(at)
        del self.flows[key]
        self.schedule_recompute(at)

    # -- rate recomputation -------------------------------------------------

    def schedule_recompute(self, at: int):
        """Coalesce: at most one RateRecompute event per timestamp."""
        if at in self._pending_recompute:
            return
        self._pending_recompute.add(at)
        self.engine.schedule(at, RATE_RECOMPUTE, self._recompute)

    def _recompute(self, now: int):
        self._pending_recompute.discard(now)
        self._settle_bytes(now)
        # forwarding may have changed; re-walk every active path
        for key in sorted(self.flows):
            flow = self.flows[key]
            path, _, _ = self.compute_path(key)
            flow.path = path
        demands = {k: f.demand for k, f in self.flows.items()}
        paths = {k: f.path for k, f in self.flows.items()}
        alloc = compute_rates(demands, paths, self.topo.capacity)
        for key, rate in alloc.items():
            self.flows[key].allocated = rate

    def _settle_bytes(self, now: int):
        """Integrate bytes up to ``now`` under the current (constant) rates."""
        dt = (now - self._last_rate_change) / SEC
        if dt > 0:
            for key, flow in self.flows.items():
                self._bytes[key] += flow.allocated * dt / 8.0
        self._last_rate_change = max(self._last_rate_change, now)

    def flow_bytes(self, key: FlowKey, now: int) -> float:
        flow = self.flows[key]
        dt = max(0, now - self._last_rate_change) / SEC
        return self._bytes[key] + flow.allocated * dt / 8.0

    def flows_through(self, node: str) -> list:
        """Active flows whose path traverses (or terminates at) a node."""
        out = []
        for key in sorted(self.flows):
            flow = self.flows[key]
            nodes = {flow.src_host, flow.dst_host}
            for lid in flow.path:
                nodes.add(lid.split("#")[0])
            if node in nodes:
                out.append(flow)
        return out

    # -- measurements -------------------------------------------------------

    def sample_measurements(self, at: int) -> MeasurementRecord:
        arrivals = {h: 0.0 for h in self.topo.hosts()}
        for flow in self.flows.values():
            arrivals[flow.dst_host] += flow.allocated
        load: dict[str, float] = {}
        for flow in self.flows.values():
            for lid in flow.path:
                load[lid] = load.get(lid, 0.0) + flow.allocated
        util = {lid: load[lid] / self.topo.capacity[lid] for lid in sorted(load)}
        rec = MeasurementRecord(at, arrivals, sum(arrivals.values()), util)
        self.series.append(rec)
        return rec
