import numpy as np
import pytest

from timbrespace.config import StudyConfig
from timbrespace.cochlea import make_filterbank
from timbrespace.pipeline import build_library_context
from timbrespace.simulate import demo_library

SR = 16_000


@pytest.fixture(scope="session")
def fb():
    return make_filterbank(42, 26.0, 7800.0, SR)


@pytest.fixture(scope="session")
def small_config():
    # Trimmed epochs/texture size keep the session fixture cheap; the
    # acceptance module exercises full-scale settings separately.
    return StudyConfig(n_epochs=150, texture_size=128, n_neighbors=10,
                       pca_dim=6, master_seed=99)


@pytest.fixture(scope="session")
def library_ctx(small_config):
    library = demo_library(n=36, sample_rate=SR, duration=1.0, seed=3)
    return build_library_context(library, small_config)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(12345)
