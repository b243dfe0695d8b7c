"""Fluent construction of hybridsim experiment spec files.

The builder renders the INI format the CLI consumes; it does not import
the simulator. Field validation is the CLI's job (``validate``), so a
bad value set here surfaces as the CLI's own diagnostic.
"""

from __future__ import annotations

import configparser
import io


class ExperimentBuilder:
    def __init__(self):
        self._sections: dict[str, dict[str, str]] = {}

    def _set(self, section: str, key: str, value) -> "ExperimentBuilder":
        self._sections.setdefault(section, {})[key] = str(value)
        return self

    # -- topology -----------------------------------------------------

    def fattree(self, k: int = 4) -> "ExperimentBuilder":
        self._set("topology", "kind", "fattree")
        return self._set("topology", "k", k)

    def tworouter(self) -> "ExperimentBuilder":
        return self._set("topology", "kind", "tworouter")

    def link_capacity_gbps(self, gbps: float) -> "ExperimentBuilder":
        return self._set("topology", "link_capacity_gbps", gbps)

    # -- traffic engineering --------------------------------------------

    def te(self, app: str) -> "ExperimentBuilder":
        return self._set("te", "app", app)

    def poll_interval_s(self, seconds: float) -> "ExperimentBuilder":
        return self._set("te", "poll_interval_s", seconds)

    def elephant_threshold(self, fraction: float) -> "ExperimentBuilder":
        return self._set("te", "elephant_threshold", fraction)

    # -- traffic -----------------------------------------------------

    def seed(self, n: int) -> "ExperimentBuilder":
        return self._set("traffic", "seed", n)

    def demand_gbps(self, gbps: float) -> "ExperimentBuilder":
        return self._set("traffic", "demand_gbps", gbps)

    def traffic_start_s(self, seconds: float) -> "ExperimentBuilder":
        return self._set("traffic", "start_s", seconds)

    # -- engine -------------------------------------------------------

    def end_s(self, seconds: float) -> "ExperimentBuilder":
        return self._set("engine", "end_s", seconds)

    def fti_step_ms(self, ms: float) -> "ExperimentBuilder":
        return self._set("engine", "fti_step_ms", ms)

    def quiescence_timeout_s(self, seconds: float) -> "ExperimentBuilder":
        return self._set("engine", "quiescence_timeout_s", seconds)

    def pace(self, on: bool = True) -> "ExperimentBuilder":
        return self._set("engine", "pace", "on" if on else "off")

    def control_latency_ms(self, ms: float) -> "ExperimentBuilder":
        return self._set("engine", "control_latency_ms", ms)

    def mrai_ms(self, ms: float) -> "ExperimentBuilder":
        return self._set("engine", "mrai_ms", ms)

    # -- measurement ----------------------------------------------------

    def sample_interval_s(self, seconds: float) -> "ExperimentBuilder":
        return self._set("measurement", "sample_interval_s", seconds)

    # -- output --------------------------------------------------------

    def label(self) -> str:
        topo = self._sections.get("topology", {})
        parts = [topo.get("kind", "fattree")]
        if "k" in topo:
            parts.append("k" + topo["k"])
        parts.append(self._sections.get("te", {}).get("app", "ecmp-5tuple"))
        return "-".join(parts)

    def render(self) -> str:
        cp = configparser.ConfigParser()
        for section in ("topology", "te", "traffic", "engine", "measurement"):
            if section in self._sections:
                cp[section] = self._sections[section]
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def fattree(k: int = 4) -> ExperimentBuilder:
    return ExperimentBuilder().fattree(k)


def tworouter() -> ExperimentBuilder:
    return ExperimentBuilder().tworouter()
