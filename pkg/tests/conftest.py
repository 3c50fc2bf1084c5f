"""Shared session fixtures: the stochastic ensembles behind the acceptance suite.

Built once per session; every criterion reads from these. All ensembles
derive from one master seed so the whole suite is reproducible.
"""

import time
from dataclasses import replace

import pytest

from ssilm import ilm, metrics

ACCEPT_SEED = 7
RUNS = 20
SMALL_GRID = [0.5, 0.6, 0.75, 1.0]


@pytest.fixture(scope="session")
def small_baselines():
    return metrics.compute_baselines(10, 10, samples=1000)


@pytest.fixture(scope="session")
def small_ensembles(small_baselines):
    """Small-preset runs at each grid p; dict with timing for the runtime criteria."""
    cfg = ilm.preset("small")
    start = time.perf_counter()
    trajs = ilm.run_batch(cfg, SMALL_GRID, RUNS, ACCEPT_SEED, baselines=small_baselines)
    elapsed = time.perf_counter() - start
    by_p = {p: [t for t in trajs if t.p_index == ip] for ip, p in enumerate(SMALL_GRID)}
    return {"config": cfg, "by_p": by_p, "elapsed": elapsed, "baselines": small_baselines}


@pytest.fixture(scope="session")
def arch_ensembles():
    """Alternative architectures at p = 0.75 for the robustness criterion."""
    out = {}
    for label, (n1, n2, n3) in (("10x12x10", (10, 12, 10)), ("10x15x20", (10, 15, 20))):
        cfg = replace(ilm.preset("small"), n1=n1, n2=n2, n3=n3)
        baselines = metrics.compute_baselines(n1, n3, samples=300)
        out[label] = ilm.run_batch(cfg, [0.75], RUNS, ACCEPT_SEED, baselines=baselines)
    return out


@pytest.fixture(scope="session")
def large_runs():
    """Three 20-bit runs at p = 0.75; timed against the smoke budget."""
    start = time.perf_counter()
    cfg = replace(ilm.preset("large"), baseline_samples=150)
    baselines = metrics.compute_baselines(20, 20, samples=150)
    trajs = ilm.run_batch(cfg, [0.75], 3, ACCEPT_SEED, baselines=baselines)
    elapsed = time.perf_counter() - start
    return {"trajectories": trajs, "elapsed": elapsed}
