import pytest

from hdv.model import set_exact_sigmoid


@pytest.fixture
def exact_sigmoid():
    """Closed-form sigmoid for tests that differentiate or compare losses;
    the lookup table is piecewise constant and would defeat both."""
    set_exact_sigmoid(True)
    yield
    set_exact_sigmoid(False)
