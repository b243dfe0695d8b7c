"""Topology construction: generic node/link graphs and k-pod Fat-Trees.

Nodes are hosts, switches, or routers. Every cable is modeled as a pair
of directed links (one per direction), each with its own capacity; a
directed link is identified by its egress side as ``"<node>#<port>"``.

Fat-Tree addressing follows the 10.pod.switch.id convention: the host at
position ``i`` under edge switch ``e`` of pod ``p`` gets 10.p.e.(i+2),
and that edge's subnet is 10.p.e.0/24.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidK, NoPath

HOST = "host"
SWITCH = "switch"
ROUTER = "router"

SWITCH_FABRIC = "switch"
ROUTER_FABRIC = "router"

LAYER_EDGE = "edge"
LAYER_AGG = "agg"
LAYER_CORE = "core"


def ip(a: int, b: int, c: int, d: int) -> int:
    return (a << 24) | (b << 16) | (c << 8) | d


def ip_str(addr: int) -> str:
    return f"{addr >> 24 & 255}.{addr >> 16 & 255}.{addr >> 8 & 255}.{addr & 255}"


def link_id(node: str, port: int) -> str:
    return f"{node}#{port}"


@dataclass
class Node:
    name: str
    kind: str
    addr: int | None = None       # hosts only
    asn: int | None = None        # routers only
    layer: str | None = None      # fat-tree metadata
    pod: int | None = None
    index: int | None = None


@dataclass
class Topology:
    nodes: dict = field(default_factory=dict)        # name -> Node
    ports: dict = field(default_factory=dict)        # name -> {port: (peer, peer_port)}
    capacity: dict = field(default_factory=dict)     # directed link id -> bits/s
    host_by_addr: dict = field(default_factory=dict)  # addr -> host name
    fat_tree_k: int | None = None

    def add_node(self, name, kind, **kw) -> Node:
        if name in self.nodes:
            raise ValueError(f"duplicate node {name}")
        node = Node(name, kind, **kw)
        self.nodes[name] = node
        self.ports[name] = {}
        if node.addr is not None:
            if node.addr in self.host_by_addr:
                raise ValueError(f"duplicate host address {ip_str(node.addr)}")
            self.host_by_addr[node.addr] = name
        return node

    def add_link(self, a: str, b: str, capacity: float) -> tuple[int, int]:
        """Wire a bidirectional cable; returns the (port_a, port_b) pair."""
        pa = len(self.ports[a])
        pb = len(self.ports[b])
        self.ports[a][pa] = (b, pb)
        self.ports[b][pb] = (a, pa)
        self.capacity[link_id(a, pa)] = capacity
        self.capacity[link_id(b, pb)] = capacity
        return pa, pb

    def neighbor(self, node: str, port: int) -> tuple[str, int]:
        return self.ports[node][port]

    def port_toward(self, a: str, b: str) -> int:
        for p, (peer, _) in self.ports[a].items():
            if peer == b:
                return p
        raise KeyError(f"{a} has no link toward {b}")

    def adjacent(self, a: str, b: str) -> bool:
        return any(peer == b for peer, _ in self.ports[a].values())

    def hosts(self) -> list:
        return sorted(n for n, nd in self.nodes.items() if nd.kind == HOST)

    def routers(self) -> list:
        return sorted(n for n, nd in self.nodes.items() if nd.kind == ROUTER)

    def switches(self) -> list:
        return sorted(n for n, nd in self.nodes.items() if nd.kind == SWITCH)

    def up_ports(self, node: str) -> list:
        """Ports of a fat-tree edge/agg node that lead one layer up."""
        above = {LAYER_EDGE: LAYER_AGG, LAYER_AGG: LAYER_CORE}[self.nodes[node].layer]
        out = []
        for p in sorted(self.ports[node]):
            peer, _ = self.ports[node][p]
            if self.nodes[peer].layer == above:
                out.append(p)
        return out


@dataclass
class FatTreeParams:
    k: int
    link_capacity: float = 1e9  # bits/s

    def validate(self):
        if self.k < 2 or self.k % 2 != 0:
            raise InvalidK(f"k must be even and >= 2, got {self.k}")


def host_name(pod: int, edge: int, i: int) -> str:
    return f"h_{pod}_{edge}_{i}"


def edge_name(pod: int, e: int) -> str:
    return f"edge_{pod}_{e}"


def agg_name(pod: int, a: int) -> str:
    return f"agg_{pod}_{a}"


def core_name(c: int) -> str:
    return f"core_{c}"


def build_fat_tree(params: FatTreeParams, fabric: str = SWITCH_FABRIC) -> Topology:
    """Build a k-pod Fat-Tree.

    Structure: k pods of k/2 edge and k/2 aggregation switches, (k/2)^2
    core switches, k/2 hosts per edge switch. Aggregation switch ``a`` of
    every pod connects to cores ``a*(k/2) .. a*(k/2)+k/2-1``. In
    ROUTER_FABRIC mode every switch becomes a BGP router with a distinct
    ASN derived from (layer, pod, index).
    """
    params.validate()
    k = params.k
    half = k // 2
    topo = Topology(fat_tree_k=k)
    fabric_kind = ROUTER if fabric == ROUTER_FABRIC else SWITCH

    def asn_for(layer_rank: int, pod: int, idx: int) -> int | None:
        if fabric_kind != ROUTER:
            return None
        # deterministic private ASN, unique per (layer, pod, index)
        return 64512 + layer_rank * k * half + pod * half + idx

    for c in range(half * half):
        topo.add_node(core_name(c), fabric_kind, layer=LAYER_CORE, index=c,
                      asn=asn_for(2, 0, c))
    for p in range(k):
        for a in range(half):
            topo.add_node(agg_name(p, a), fabric_kind, layer=LAYER_AGG,
                          pod=p, index=a, asn=asn_for(1, p, a))
        for e in range(half):
            topo.add_node(edge_name(p, e), fabric_kind, layer=LAYER_EDGE,
                          pod=p, index=e, asn=asn_for(0, p, e))
            for i in range(half):
                topo.add_node(host_name(p, e, i), HOST,
                              addr=ip(10, p, e, i + 2), pod=p)
    cap = params.link_capacity
    for p in range(k):
        for e in range(half):
            for i in range(half):
                topo.add_link(host_name(p, e, i), edge_name(p, e), cap)
            for a in range(half):
                topo.add_link(edge_name(p, e), agg_name(p, a), cap)
        for a in range(half):
            for j in range(half):
                topo.add_link(agg_name(p, a), core_name(a * half + j), cap)
    return topo


def edge_subnet(pod: int, e: int) -> tuple[int, int]:
    """(prefix, length) of the /24 under edge switch e of pod."""
    return ip(10, pod, e, 0), 24


def pod_subnet(pod: int) -> tuple[int, int]:
    return ip(10, pod, 0, 0), 16


def attachment(topo: Topology, host: str) -> tuple[str, int]:
    """(edge node, edge-side port) where a host attaches."""
    peer, peer_port = topo.ports[host][0]
    return peer, peer_port


def shortest_paths_up_down(topo: Topology, src: str, dst: str) -> list:
    """All minimal-hop up-down paths between two fat-tree hosts.

    Each path is a list of node names from src to dst inclusive.
    """
    if src == dst:
        raise ValueError("src and dst must differ")
    ns, nd = topo.nodes[src], topo.nodes[dst]
    if ns.kind != HOST or nd.kind != HOST:
        raise ValueError("endpoints must be hosts")
    if topo.fat_tree_k is None:
        raise NoPath("not a fat-tree topology")
    k = topo.fat_tree_k
    half = k // 2
    se, _ = attachment(topo, src)
    de, _ = attachment(topo, dst)
    if se == de:
        return [[src, se, dst]]
    sp, si = topo.nodes[se].pod, topo.nodes[se].index
    dp, di = topo.nodes[de].pod, topo.nodes[de].index
    paths = []
    if sp == dp:
        for a in range(half):
            paths.append([src, se, agg_name(sp, a), de, dst])
    else:
        for a in range(half):
            for j in range(half):
                c = a * half + j
                paths.append([src, se, agg_name(sp, a), core_name(c),
                              agg_name(dp, a), de, dst])
    return paths


def path_links(topo: Topology, node_path: list) -> list:
    """Directed link ids along a node path."""
    out = []
    for a, b in zip(node_path, node_path[1:]):
        out.append(link_id(a, topo.port_toward(a, b)))
    return out


def build_two_routers(link_capacity: float = 1e9) -> Topology:
    """Two BGP routers, one host each: h1 - R1 - R2 - h2."""
    topo = Topology()
    topo.add_node("r1", ROUTER, asn=65001)
    topo.add_node("r2", ROUTER, asn=65002)
    topo.add_node("h1", HOST, addr=ip(10, 1, 0, 2))
    topo.add_node("h2", HOST, addr=ip(10, 2, 0, 2))
    topo.add_link("h1", "r1", link_capacity)
    topo.add_link("h2", "r2", link_capacity)
    topo.add_link("r1", "r2", link_capacity)
    return topo
