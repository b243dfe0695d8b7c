"""Locating and driving the hybridsim CLI."""

from __future__ import annotations

import importlib.util
import shutil
import subprocess
import sys
from pathlib import Path

from .builder import ExperimentBuilder
from .errors import BinaryNotFound, RunFailed
from .results import ResultSet, load_results


def find_cli(explicit=None) -> list:
    """Command prefix for the hybridsim CLI.

    Prefers an explicit path, then the ``hybridsim`` entry point on
    PATH, then the module run through the current interpreter.
    """
    if explicit is not None:
        if not Path(explicit).exists():
            raise BinaryNotFound(f"no such binary: {explicit}")
        return [str(explicit)]
    path = shutil.which("hybridsim")
    if path:
        return [path]
    if importlib.util.find_spec("hybridsim") is not None:
        return [sys.executable, "-m", "hybridsim.cli"]
    raise BinaryNotFound("hybridsim not found on PATH and the module is "
                         "not importable; pass an explicit binary path")


def _run(cmd: list) -> subprocess.CompletedProcess:
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        diagnostic = proc.stderr.strip() or proc.stdout.strip()
        raise RunFailed(diagnostic)
    return proc


def validate(builder: ExperimentBuilder, work_dir, cli=None) -> None:
    """Run the CLI's validate over the builder's rendering."""
    work_dir = Path(work_dir)
    work_dir.mkdir(parents=True, exist_ok=True)
    spec_path = work_dir / "spec.ini"
    spec_path.write_text(builder.render())
    _run(find_cli(cli) + ["validate", str(spec_path)])


def build_and_run(builder: ExperimentBuilder, out_dir, cli=None,
                  label=None) -> ResultSet:
    """Write the spec, invoke ``hybridsim run``, and load the results."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec_path = out_dir / "spec.ini"
    spec_path.write_text(builder.render())
    _run(find_cli(cli) + ["run", str(spec_path), "--out", str(out_dir)])
    return load_results(out_dir, label or builder.label())
