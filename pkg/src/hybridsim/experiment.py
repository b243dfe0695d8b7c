"""Declarative experiment specs, the runner, and result serialization.

Spec files are flat INI-style key-value sections. Results are written
as ``rates.csv`` (long format: time_s, host_id, arrival_bps, with an
``aggregate`` pseudo-host row per sample), ``modes.csv`` (time_s, mode)
and ``report.txt`` (timing breakdown and, for router fabrics, the
installed routes).
"""

from __future__ import annotations

import configparser
import io
import time
from dataclasses import dataclass, field, asdict

from . import teapps, topology as tp
from .controlplane import ConnectionManager, SwitchAgent, rib_dump
from .dataplane import HASH_5TUPLE, HASH_SRCDST, Network
from .engine import MEASUREMENT_SAMPLE, MS, SEC, Engine, EngineReport
from .errors import ParseError, ValidationError

TE_APPS = ("ecmp-srcdst", "ecmp-5tuple", "hedera")
TOPOLOGY_KINDS = ("fattree", "tworouter")

SPEC_DEFAULTS = {
    "topology": {"kind": "fattree", "k": "4", "link_capacity_gbps": "1.0"},
    "te": {"app": "ecmp-5tuple", "poll_interval_s": "5.0",
           "elephant_threshold": "0.1"},
    "traffic": {"seed": "1", "demand_gbps": "1.0", "start_s": "10.0"},
    "engine": {"end_s": "40.0", "fti_step_ms": "1.0",
               "quiescence_timeout_s": "2.0", "pace": "off",
               "control_latency_ms": "10.0", "mrai_ms": "50.0"},
    "measurement": {"sample_interval_s": "0.1"},
}


@dataclass
class ExperimentSpec:
    kind: str = "fattree"
    k: int = 4
    link_capacity: float = 1e9          # bits/s
    te_app: str = "ecmp-5tuple"
    poll_interval: int = 5 * SEC        # virtual ns
    elephant_threshold: float = 0.1
    seed: int = 1
    demand: float = 1e9                 # bits/s
    traffic_start: int = 10 * SEC
    end: int = 40 * SEC
    fti_step: int = 1 * MS
    quiescence_timeout: int = 2 * SEC
    pace: bool = False
    control_latency: int = 10 * MS
    mrai: int = 50 * MS
    sample_interval: int = 100 * MS

    def validate(self):
        if self.kind not in TOPOLOGY_KINDS:
            raise ValidationError(
                f"topology.kind must be one of {TOPOLOGY_KINDS}, got {self.kind!r}")
        if self.kind == "fattree" and (self.k < 2 or self.k % 2 != 0):
            raise ValidationError(f"topology.k must be even and >= 2, got {self.k}")
        if self.te_app not in TE_APPS:
            raise ValidationError(
                f"te.app must be one of {TE_APPS}, got {self.te_app!r}")
        if self.end <= self.traffic_start:
            raise ValidationError("engine.end_s must exceed traffic.start_s")
        if not (0 < self.elephant_threshold <= 1):
            raise ValidationError("te.elephant_threshold must be in (0, 1]")
        for name in ("link_capacity", "demand", "poll_interval", "fti_step",
                     "quiescence_timeout", "sample_interval"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive")
        if self.kind == "tworouter" and self.te_app != "ecmp-srcdst":
            raise ValidationError("tworouter topology requires te.app = ecmp-srcdst")

    def fabric(self) -> str:
        return tp.ROUTER_FABRIC if self.te_app == "ecmp-srcdst" else tp.SWITCH_FABRIC

    def render(self) -> str:
        cp = configparser.ConfigParser()
        cp["topology"] = {"kind": self.kind, "k": str(self.k),
                          "link_capacity_gbps": repr(self.link_capacity / 1e9)}
        cp["te"] = {"app": self.te_app,
                    "poll_interval_s": repr(self.poll_interval / SEC),
                    "elephant_threshold": repr(self.elephant_threshold)}
        cp["traffic"] = {"seed": str(self.seed),
                         "demand_gbps": repr(self.demand / 1e9),
                         "start_s": repr(self.traffic_start / SEC)}
        cp["engine"] = {"end_s": repr(self.end / SEC),
                        "fti_step_ms": repr(self.fti_step / MS),
                        "quiescence_timeout_s": repr(self.quiescence_timeout / SEC),
                        "pace": "on" if self.pace else "off",
                        "control_latency_ms": repr(self.control_latency / MS),
                        "mrai_ms": repr(self.mrai / MS)}
        cp["measurement"] = {"sample_interval_s": repr(self.sample_interval / SEC)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _get(cp, section, key, conv, what):
    raw = cp.get(section, key)
    try:
        return conv(raw)
    except ValueError as exc:
        raise ParseError(f"{section}.{key}: cannot parse {raw!r} as {what}") from exc


def parse_spec(text: str) -> ExperimentSpec:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ParseError(str(exc)) from exc
    known = set(SPEC_DEFAULTS)
    for section in cp.sections():
        if section not in known:
            raise ValidationError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in SPEC_DEFAULTS[section]:
                raise ValidationError(f"unknown key {section}.{key}")
    for section, defaults in SPEC_DEFAULTS.items():
        if not cp.has_section(section):
            cp.add_section(section)
        for key, value in defaults.items():
            if not cp.has_option(section, key):
                cp.set(section, key, value)
    pace_raw = cp.get("engine", "pace").lower()
    if pace_raw not in ("on", "off", "true", "false", "yes", "no", "0", "1"):
        raise ParseError(f"engine.pace: cannot parse {pace_raw!r} as boolean")
    spec = ExperimentSpec(
        kind=cp.get("topology", "kind"),
        k=_get(cp, "topology", "k", int, "integer"),
        link_capacity=_get(cp, "topology", "link_capacity_gbps", float, "number") * 1e9,
        te_app=cp.get("te", "app"),
        poll_interval=int(_get(cp, "te", "poll_interval_s", float, "number") * SEC),
        elephant_threshold=_get(cp, "te", "elephant_threshold", float, "number"),
        seed=_get(cp, "traffic", "seed", int, "integer"),
        demand=_get(cp, "traffic", "demand_gbps", float, "number") * 1e9,
        traffic_start=int(_get(cp, "traffic", "start_s", float, "number") * SEC),
        end=int(_get(cp, "engine", "end_s", float, "number") * SEC),
        fti_step=int(_get(cp, "engine", "fti_step_ms", float, "number") * MS),
        quiescence_timeout=int(
            _get(cp, "engine", "quiescence_timeout_s", float, "number") * SEC),
        pace=pace_raw in ("on", "true", "yes", "1"),
        control_latency=int(
            _get(cp, "engine", "control_latency_ms", float, "number") * MS),
        mrai=int(_get(cp, "engine", "mrai_ms", float, "number") * MS),
        sample_interval=int(
            _get(cp, "measurement", "sample_interval_s", float, "number") * SEC),
    )
    spec.validate()
    return spec


@dataclass
class RunReport:
    spec: ExperimentSpec
    engine: EngineReport
    topology_build_seconds: float
    run_wall_seconds: float
    series: list
    converged_by_traffic_start: bool
    installed_routes: list = field(default_factory=list)
    cm_deliveries: int = 0
    cm_notifications: int = 0

    def steady_mean_aggregate(self, from_time: int | None = None) -> float:
        """Mean aggregate arrival rate over samples at/after from_time
        (default: midpoint between traffic start and end)."""
        if from_time is None:
            from_time = (self.spec.traffic_start + self.spec.end) // 2
        vals = [r.aggregate for r in self.series if r.time >= from_time]
        return sum(vals) / len(vals) if vals else 0.0


def build_topology(spec: ExperimentSpec) -> tp.Topology:
    if spec.kind == "tworouter":
        return tp.build_two_routers(spec.link_capacity)
    return tp.build_fat_tree(tp.FatTreeParams(spec.k, spec.link_capacity),
                             spec.fabric())


def run_experiment(spec: ExperimentSpec) -> RunReport:
    spec.validate()
    t0 = time.perf_counter()
    topo = build_topology(spec)
    build_seconds = time.perf_counter() - t0

    engine = Engine(fti_step=spec.fti_step,
                    quiescence_timeout=spec.quiescence_timeout, pace=spec.pace)
    variant = HASH_SRCDST if spec.te_app == "ecmp-srcdst" else HASH_5TUPLE
    network = Network(topo, engine, default_hash_variant=variant)
    cm = ConnectionManager(engine, latency=spec.control_latency)

    speakers = {}
    if spec.te_app == "ecmp-srcdst":
        speakers = teapps.setup_bgp_fabric(topo, network, engine, cm,
                                           mrai=spec.mrai, hash_variant=variant)
    elif spec.te_app == "ecmp-5tuple":
        agents = [SwitchAgent(sw, network, cm) for sw in topo.switches()]
        controller = teapps.SdnEcmpController(topo, network, engine, cm,
                                              hash_variant=variant)
        controller.install_baseline(0)
    else:  # hedera
        agents = [SwitchAgent(sw, network, cm) for sw in topo.switches()]
        config = teapps.HederaConfig(poll_interval=spec.poll_interval,
                                     elephant_threshold=spec.elephant_threshold)
        scheduler = teapps.HederaScheduler(topo, network, engine, cm, config,
                                           host_capacity=spec.link_capacity,
                                           hash_variant=variant)
        scheduler.install_baseline(0)
        first = ((spec.traffic_start // spec.poll_interval) + 1) * spec.poll_interval
        scheduler.schedule_polls(first, spec.end)

    pattern = teapps.gen_permutation_traffic(
        topo.hosts(), topo, spec.seed, spec.demand, spec.traffic_start)
    teapps.schedule_flows(network, pattern)

    converged_flag = {"value": True}

    def check_convergence(now):
        converged_flag["value"] = engine.mode == "DES"

    engine.schedule(spec.traffic_start, "ConvergenceCheck", check_convergence)

    t = 0
    while t <= spec.end:
        engine.schedule(t, MEASUREMENT_SAMPLE,
                        lambda now: network.sample_measurements(now))
        t += spec.sample_interval

    t1 = time.perf_counter()
    engine_report = engine.run(spec.end)
    run_seconds = time.perf_counter() - t1

    routes = []
    for name in sorted(speakers):
        routes.extend(rib_dump(speakers[name]))

    return RunReport(spec=spec, engine=engine_report,
                     topology_build_seconds=build_seconds,
                     run_wall_seconds=run_seconds,
                     series=list(network.series),
                     converged_by_traffic_start=converged_flag["value"],
                     installed_routes=routes,
                     cm_deliveries=cm.deliveries,
                     cm_notifications=engine.activity_notifications)


# -- serialization ----------------------------------------------------------

def rates_csv(report: RunReport) -> str:
    lines = ["time_s,host_id,arrival_bps"]
    for rec in report.series:
        ts = f"{rec.time / SEC:.6f}"
        for host in sorted(rec.arrivals):
            lines.append(f"{ts},{host},{rec.arrivals[host]:.3f}")
        lines.append(f"{ts},aggregate,{rec.aggregate:.3f}")
    return "\n".join(lines) + "\n"


def modes_csv(report: RunReport) -> str:
    lines = ["time_s,mode"]
    for t, mode in report.engine.mode_trace:
        lines.append(f"{t / SEC:.6f},{mode}")
    return "\n".join(lines) + "\n"


def report_txt(report: RunReport) -> str:
    eng = report.engine
    out = []
    out.append("== experiment report ==")
    out.append(f"topology: {report.spec.kind} k={report.spec.k} "
               f"te_app={report.spec.te_app} seed={report.spec.seed}")
    out.append(f"topology_build_s: {report.topology_build_seconds:.6f}")
    out.append(f"run_wall_s: {report.run_wall_seconds:.6f}")
    out.append(f"final_clock_s: {eng.final_clock / SEC:.6f}")
    out.append(f"virtual_des_s: {eng.virtual_ns['DES'] / SEC:.6f}")
    out.append(f"virtual_fti_s: {eng.virtual_ns['FTI'] / SEC:.6f}")
    out.append(f"wall_des_s: {eng.wall_by_mode['DES']:.6f}")
    out.append(f"wall_fti_s: {eng.wall_by_mode['FTI']:.6f}")
    out.append(f"lag_ms: {eng.lag_ns / MS:.3f}")
    out.append(f"events_total: {eng.total_events}")
    for kind in sorted(eng.events_executed):
        out.append(f"events[{kind}]: {eng.events_executed[kind]}")
    out.append(f"cm_deliveries: {report.cm_deliveries}")
    out.append(f"cm_notifications: {report.cm_notifications}")
    out.append("converged_by_traffic_start: "
               + ("yes" if report.converged_by_traffic_start else "no"))
    out.append(f"steady_mean_aggregate_bps: {report.steady_mean_aggregate():.3f}")
    if report.installed_routes:
        out.append("installed routes:")
        for line in report.installed_routes:
            out.append("  " + line)
    return "\n".join(out) + "\n"


def compare_table(reports: list) -> str:
    rows = sorted(reports, key=lambda r: (r.spec.k, r.spec.te_app))
    lines = ["k,te_app,topology_build_s,run_wall_s,steady_mean_aggregate_bps"]
    for r in rows:
        lines.append(f"{r.spec.k},{r.spec.te_app},{r.topology_build_seconds:.6f},"
                     f"{r.run_wall_seconds:.6f},{r.steady_mean_aggregate():.3f}")
    return "\n".join(lines) + "\n"
