"""Shared fixtures: the heavyweight benchmark studies are run once per
session and reused by the unit tests and the acceptance gate."""

import time
from types import SimpleNamespace

import pytest

from ctxsearch.harness import (
    ExperimentConfig,
    run_convergence_study,
    run_dims_study,
    run_ratio_study,
)

ACCEPT_SEED = 20260810
CONV_BUDGETS = (1000, 3162, 10000, 31623, 100000)


def _timed(runner, cfg):
    t0 = time.perf_counter()
    records = runner(cfg)
    return SimpleNamespace(
        cfg=cfg, records=records, elapsed=time.perf_counter() - t0
    )


@pytest.fixture(scope="session")
def convergence_study(tmp_path_factory):
    out = tmp_path_factory.mktemp("conv") / "convergence.csv"
    cfg = ExperimentConfig(
        study="convergence",
        d_list=(2,),
        label_budgets=CONV_BUDGETS,
        trials=50,
        seed=ACCEPT_SEED,
        out_path=str(out),
    )
    return _timed(run_convergence_study, cfg)


@pytest.fixture(scope="session")
def dims_study(tmp_path_factory):
    out = tmp_path_factory.mktemp("dims") / "dims.csv"
    cfg = ExperimentConfig(
        study="dims",
        d_list=(3, 6, 12),
        label_budgets=(30000,),
        trials=50,
        seed=ACCEPT_SEED,
        out_path=str(out),
    )
    return _timed(run_dims_study, cfg)


@pytest.fixture(scope="session")
def ratio_study(tmp_path_factory):
    out = tmp_path_factory.mktemp("ratio") / "ratio.csv"
    cfg = ExperimentConfig(
        study="ratio",
        d_list=(2,),
        label_budgets=(10000,),
        trials=50,
        seed=ACCEPT_SEED,
        rho_list=(0.0, 0.5, 1.0, 2.0, 4.0),
        out_path=str(out),
    )
    return _timed(run_ratio_study, cfg)
