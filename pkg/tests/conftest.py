import numpy as np
import pytest

from gaborcorner import DetectorConfig, detect, preset_model, render_model


@pytest.fixture(scope="session")
def default_config():
    return DetectorConfig()


@pytest.fixture(scope="session")
def rendered_models():
    """Default 129x129 renders of every preset, with their vertices."""
    out = {}
    for name in ("step", "L", "Y", "T", "X", "star"):
        out[name] = render_model(preset_model(name))
    return out


@pytest.fixture(scope="session")
def model_detections(rendered_models, default_config):
    """Detector output on every preset render (computed once per run)."""
    return {
        name: detect(image, default_config)
        for name, (image, _) in rendered_models.items()
    }


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
