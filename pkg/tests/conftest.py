import pytest

from sirham import CompartmentState, EpidemicParams, ParamSchedule


@pytest.fixture
def params() -> EpidemicParams:
    """The reference parameter set used throughout the suite (r0 = 3)."""
    return EpidemicParams(beta=0.3, gamma=0.1)


@pytest.fixture
def schedule(params) -> ParamSchedule:
    return ParamSchedule.constant(params)


@pytest.fixture
def init() -> CompartmentState:
    return CompartmentState(s=0.99, i=0.01, r=0.0)
