import math

import numpy as np
import pytest
from hypothesis import settings

from quatdiff.checks import random_compliant_state

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def compliant_states():
    gen = np.random.default_rng(777)
    return [random_compliant_state(gen) for _ in range(50)]


def random_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def unit_axis(rng):
    u = rng.normal(size=3)
    return u / np.linalg.norm(u)


def angle_between(a, b):
    return math.acos(max(-1.0, min(1.0, float(a @ b) / (np.linalg.norm(a) * np.linalg.norm(b)))))
