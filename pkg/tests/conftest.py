import pytest

from fransonsim.models import ModelKind
from fransonsim.montecarlo import ExperimentConfig, ScanSpec, run_scan


@pytest.fixture(scope="session")
def desk_length_spec():
    return ScanSpec.path_length()  # 0.12 mm steps over +-3 mm


@pytest.fixture(scope="session")
def qm_length_scan(desk_length_spec):
    return run_scan(ExperimentConfig(seed=11), desk_length_spec)


@pytest.fixture(scope="session")
def ms_length_scan(desk_length_spec):
    cfg = ExperimentConfig(seed=11, model=ModelKind.multisimultaneity())
    return run_scan(cfg, desk_length_spec)
