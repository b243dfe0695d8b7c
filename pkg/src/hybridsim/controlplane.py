"""In-process emulated control plane.

A Connection Manager carries every control message; each delivery
notifies the engine so the hybrid clock stays in (or enters) FTI while
the control plane is active. On top of it run a simplified BGP speaker
per router (RIB, shortest-AS-path best selection with ECMP ties, MRAI
batching) and an OpenFlow-style switch agent (flow-mods, stats).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dataplane import Action, Match, Network, output
from .engine import CONTROL_DELIVERY, MS, Engine
from .errors import (AlreadyEstablished, NotAdjacent, SessionNotEstablished)
from .topology import Topology, ip_str

IDLE = "Idle"
OPEN_SENT = "OpenSent"
ESTABLISHED = "Established"

LOCAL = "LOCAL"

OPEN = "Open"
KEEPALIVE = "Keepalive"
UPDATE = "Update"
FLOW_MOD = "FlowMod"
STATS_REQUEST = "StatsRequest"
STATS_REPLY = "StatsReply"


@dataclass
class BgpMessage:
    kind: str
    announced: list = field(default_factory=list)   # [(prefix, length, as_path)]
    withdrawn: list = field(default_factory=list)   # [(prefix, length)]


@dataclass
class SdnMessage:
    kind: str
    priority: int = 0
    match: Match | None = None
    action: Action | None = None
    stats: list = field(default_factory=list)   # [(FlowKey, rate bps, bytes)]
    switch: str = ""


class ConnectionManager:
    """Bridge between control-plane entities and the engine.

    Every send becomes a ControlMessageDelivery event after a fixed
    per-hop latency; executing the delivery issues exactly one
    control-activity notification before handing the message to the
    destination's handler.
    """

    def __init__(self, engine: Engine, latency: int = 10 * MS):
        self.engine = engine
        self.latency = latency
        self.endpoints: dict = {}
        self.deliveries = 0

    def register(self, name: str, handler):
        self.endpoints[name] = handler

    def send(self, src: str, dst: str, msg, now: int):
        at = now + self.latency

        def deliver(t, msg=msg, src=src, dst=dst):
            self.deliveries += 1
            self.engine.notify_control_activity(t)
            self.endpoints[dst](msg, src, t)

        self.engine.schedule(at, CONTROL_DELIVERY, deliver)


@dataclass
class RibEntry:
    prefix: int
    length: int
    next_hop: str              # peer router name, or LOCAL
    as_path: tuple
    learned_from: str          # peer router name, or LOCAL


class BgpSpeaker:
    """Simplified BGP state machine for one router.

    Sessions follow Idle -> OpenSent -> Established. Best path per
    prefix is the shortest AS path, tie-broken by lowest peer router id;
    all next hops tying on path length form an ECMP group in the FIB
    (deliberate multipath extension of the single-best rule).
    """

    def __init__(self, router: str, topo: Topology, network: Network,
                 cm: ConnectionManager, engine: Engine,
                 mrai: int = 50 * MS, hash_variant: str = "srcdst"):
        self.router = router
        self.asn = topo.nodes[router].asn
        self.router_id = self.asn
        self.topo = topo
        self.network = network
        self.cm = cm
        self.engine = engine
        self.mrai = mrai
        self.hash_variant = hash_variant
        self.sessions: dict[str, str] = {}
        self.rib: dict[tuple, dict[str, RibEntry]] = {}
        self.adj_out: dict[str, dict] = {}  # peer -> {(prefix, len): advertised path}
        self.installed: dict[tuple, tuple] = {}  # (prefix,len) -> sorted port tuple
        self._mrai_next: dict[str, int] = {}
        self._mrai_pending_ann: dict[str, dict] = {}
        self._mrai_pending_wd: dict[str, set] = {}
        self._mrai_timer: dict[str, bool] = {}
        cm.register(router, self.handle_message)

    # -- local origination -------------------------------------------------

    def originate(self, prefix: int, length: int):
        self.rib.setdefault((prefix, length), {})[LOCAL] = RibEntry(
            prefix, length, LOCAL, (), LOCAL)

    # -- session management --------------------------------------------------

    def open_session_with(self, peer: "BgpSpeaker", at: int):
        if not self.topo.adjacent(self.router, peer.router):
            raise NotAdjacent(f"{self.router} and {peer.router} are not adjacent")
        if self.sessions.get(peer.router, IDLE) != IDLE:
            raise AlreadyEstablished(
                f"session {self.router}-{peer.router} already open")
        self.sessions[peer.router] = OPEN_SENT
        self.cm.send(self.router, peer.router, BgpMessage(OPEN), at)

    def handle_message(self, msg, src: str, at: int):
        if isinstance(msg, BgpMessage):
            if msg.kind == OPEN:
                self._handle_open(src, at)
            elif msg.kind == KEEPALIVE:
                self._handle_keepalive(src, at)
            elif msg.kind == UPDATE:
                self.handle_update(src, msg, at)

    def _handle_open(self, src: str, at: int):
        state = self.sessions.get(src, IDLE)
        if state == IDLE:
            # passive side: answer with our own Open as well
            self.sessions[src] = OPEN_SENT
            self.cm.send(self.router, src, BgpMessage(OPEN), at)
        self.cm.send(self.router, src, BgpMessage(KEEPALIVE), at)

    def _handle_keepalive(self, src: str, at: int):
        if self.sessions.get(src) == ESTABLISHED:
            return
        self.sessions[src] = ESTABLISHED
        self._advertise_all(src, at)

    def _advertise_all(self, peer: str, at: int):
        for (prefix, length) in sorted(self.rib):
            best = self._best_entries((prefix, length))
            if not best:
                continue
            rep = best[0]
            if rep.learned_from == peer:
                continue
            self._queue_announce(peer, prefix, length, rep.as_path, at)

    # -- update processing -----------------------------------------------------

    def handle_update(self, src: str, msg: BgpMessage, at: int):
        if self.sessions.get(src) != ESTABLISHED:
            raise SessionNotEstablished(
                f"update from {src} on non-established session at {self.router}")
        changed: list[tuple] = []
        for (prefix, length, as_path) in msg.announced:
            as_path = tuple(as_path)
            if self.asn in as_path:
                continue  # loop detection
            entries = self.rib.setdefault((prefix, length), {})
            prev = entries.get(src)
            if prev is not None and prev.as_path == as_path:
                continue  # duplicate announcement; suppress churn
            entries[src] = RibEntry(prefix, length, src, as_path, src)
            changed.append((prefix, length))
        for (prefix, length) in msg.withdrawn:
            entries = self.rib.get((prefix, length), {})
            if src in entries:
                del entries[src]
                changed.append((prefix, length))
        for pfx in sorted(set(changed)):
            self._reselect(pfx, at)

    def _peer_id(self, name: str) -> int:
        if name == LOCAL:
            return -1
        return self.topo.nodes[name].asn

    def _best_entries(self, pfx: tuple) -> list:
        entries = self.rib.get(pfx, {})
        if not entries:
            return []
        best_len = min(len(e.as_path) for e in entries.values())
        best = [e for e in entries.values() if len(e.as_path) == best_len]
        best.sort(key=lambda e: self._peer_id(e.learned_from))
        return best

    def _reselect(self, pfx: tuple, at: int):
        prefix, length = pfx
        best = self._best_entries(pfx)
        if not best:
            if pfx in self.installed:
                del self.installed[pfx]
                self.network.remove_route(self.router, prefix, length, at)
            self._propagate_withdraw(pfx, at)
            return
        if best[0].learned_from == LOCAL:
            return  # locally originated; nothing to install or re-announce
        ports = tuple(sorted(
            self.topo.port_toward(self.router, e.next_hop) for e in best))
        previous = self.installed.get(pfx)
        if ports != previous:
            self.installed[pfx] = ports
            self.network.install_route(
                self.router, prefix, length,
                Action(ports, self.hash_variant), at)
        # re-announce the representative best path if it changed
        rep = best[0]
        self._propagate_announce(pfx, rep, at)

    def _propagate_announce(self, pfx: tuple, rep: RibEntry, at: int):
        prefix, length = pfx
        for peer, state in sorted(self.sessions.items()):
            if state != ESTABLISHED or peer == rep.learned_from:
                continue
            self._queue_announce(peer, prefix, length, rep.as_path, at)

    def _propagate_withdraw(self, pfx: tuple, at: int):
        prefix, length = pfx
        for peer, state in sorted(self.sessions.items()):
            if state != ESTABLISHED:
                continue
            if (prefix, length) in self.adj_out.get(peer, {}) \
                    or (prefix, length) in self._mrai_pending_ann.get(peer, {}):
                pending = self._mrai_pending_wd.setdefault(peer, set())
                pending.add((prefix, length))
                self._mrai_pending_ann.get(peer, {}).pop((prefix, length), None)
                self._arm_mrai(peer, at)

    # -- MRAI-paced sending -------------------------------------------------------

    def _queue_announce(self, peer: str, prefix: int, length: int,
                        as_path: tuple, at: int):
        pending = self._mrai_pending_ann.setdefault(peer, {})
        new_path = (self.asn,) + tuple(as_path)
        already = self.adj_out.get(peer, {}).get((prefix, length))
        if already == new_path and (prefix, length) not in pending \
                and (prefix, length) not in self._mrai_pending_wd.get(peer, set()):
            return  # identical advertisement already on the wire
        pending[(prefix, length)] = new_path
        self._mrai_pending_wd.get(peer, set()).discard((prefix, length))
        self._arm_mrai(peer, at)

    def _arm_mrai(self, peer: str, at: int):
        ready = self._mrai_next.get(peer, 0)
        if at >= ready:
            self._flush(peer, at)
        elif not self._mrai_timer.get(peer):
            self._mrai_timer[peer] = True
            self.engine.schedule(ready, "MraiFlush",
                                 lambda t, p=peer: self._mrai_fire(p, t))

    def _mrai_fire(self, peer: str, at: int):
        self._mrai_timer[peer] = False
        self._flush(peer, at)

    def _flush(self, peer: str, at: int):
        ann = self._mrai_pending_ann.get(peer, {})
        wd = self._mrai_pending_wd.get(peer, set())
        if not ann and not wd:
            return
        announced = [(p, l, path) for (p, l), path in sorted(ann.items())]
        withdrawn = sorted(wd)
        ann.clear()
        wd.clear()
        out = self.adj_out.setdefault(peer, {})
        for (p, l, path) in announced:
            out[(p, l)] = path
        for (p, l) in withdrawn:
            out.pop((p, l), None)
        self.cm.send(self.router, peer,
                     BgpMessage(UPDATE, announced, withdrawn), at)
        self._mrai_next[peer] = at + self.mrai


def open_bgp_session(a: BgpSpeaker, b: BgpSpeaker, at: int):
    """Symmetric session bring-up between two adjacent speakers."""
    a.open_session_with(b, at)
    b.open_session_with(a, at)


class SwitchAgent:
    """OpenFlow-style agent for one switch: applies FlowMods, answers stats."""

    def __init__(self, switch: str, network: Network, cm: ConnectionManager):
        self.switch = switch
        self.network = network
        self.cm = cm
        cm.register(switch, self.handle_message)

    def handle_message(self, msg: SdnMessage, src: str, at: int):
        if msg.kind == FLOW_MOD:
            self.network.apply_flow_mod(
                self.switch, msg.priority, msg.match, msg.action, at)
        elif msg.kind == STATS_REQUEST:
            stats = []
            for flow in self.network.flows_through(self.switch):
                stats.append((flow.key, flow.allocated,
                              self.network.flow_bytes(flow.key, at)))
            self.cm.send(self.switch, src,
                         SdnMessage(STATS_REPLY, stats=stats, switch=self.switch), at)


def rib_dump(speaker: BgpSpeaker) -> list:
    """Human-readable lines of the speaker's installed best routes."""
    lines = []
    for (prefix, length), ports in sorted(speaker.installed.items()):
        lines.append(f"{speaker.router}: {ip_str(prefix)}/{length} -> ports {list(ports)}")
    return lines
