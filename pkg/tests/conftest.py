import os
import time

import pytest

from motifeeg.pipeline.cli import main

SYNTH_SEED = 0


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    """The bundled synthetic dataset (10 + 10 subjects)."""
    d = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out-dir", str(d), "--seed", str(SYNTH_SEED)]) == 0
    return d


@pytest.fixture(scope="session")
def pipeline_run(synth_dir, tmp_path_factory):
    """One full pipeline run on the synthetic dataset; returns (out dir, seconds)."""
    out = tmp_path_factory.mktemp("run1")
    t0 = time.perf_counter()
    code = main(["pipeline", "--manifest", str(synth_dir / "manifest.csv"),
                 "--config", str(synth_dir / "config.toml"), "--out-dir", str(out),
                 "--threads", "1"])
    elapsed = time.perf_counter() - t0
    assert code == 0
    return out, elapsed


def artifact_files(out):
    """Relative paths of every file under `out`, sorted."""
    found = []
    for root, _, files in os.walk(out):
        for f in files:
            found.append(os.path.relpath(os.path.join(root, f), out))
    return sorted(found)


ACCEPTANCE = {}


def record_criterion(number, ok, detail):
    """Remember a criterion outcome and print its one-line verdict."""
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
