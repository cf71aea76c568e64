import pytest
from hypothesis import HealthCheck, settings

from platoondl.gf2q import FieldContext

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ctx1() -> FieldContext:
    return FieldContext(1)


@pytest.fixture(scope="session")
def ctx4() -> FieldContext:
    return FieldContext(4)


@pytest.fixture(scope="session")
def ctx8() -> FieldContext:
    return FieldContext(8)
