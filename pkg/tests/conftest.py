import numpy as np
import pytest
from hypothesis import strategies as st

from yolotraffic.geometry import BoundingBox

unit = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def boxes(draw, min_size=0.0):
    return BoundingBox(draw(unit), draw(unit), draw(st.floats(min_size, 1.0)), draw(st.floats(min_size, 1.0)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
