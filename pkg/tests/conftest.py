import os

import numpy as np
import pytest


@pytest.fixture
def rng():
    seed = int(os.environ.get("HOPFSEG_SEED", "20240817"))
    return np.random.default_rng(seed)
