import subprocess
import sys
from pathlib import Path

import pytest


@pytest.fixture(scope="session")
def tiny_run(tmp_path_factory):
    """A small real run produced through the solver's CLI; the plotting
    package consumes only its files."""
    work = tmp_path_factory.mktemp("run")
    out = work / "out"
    cfg = work / "run.cfg"
    cfg.write_text(
        "preset = example1\n"
        "mesh = 15x15\n"
        "t_end = 0.02\n"
        "dt = 1e-3\n"
        "snapshot_times = 0.01, 0.02\n"
        f"out_dir = {out}\n"
    )
    res = subprocess.run(
        [sys.executable, "-m", "radmesh.cli", "run", "--config", str(cfg)],
        capture_output=True, text=True,
    )
    assert res.returncode == 0, res.stderr
    return out / "manifest.json"
