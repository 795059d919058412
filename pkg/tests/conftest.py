import numpy as np
import pytest

from rubblepile.config import SimConfig
from rubblepile.deposition import build_pile


@pytest.fixture(scope="session")
def small_pile():
    """Shared settled pile; cheap enough to build once per session."""
    return build_pile(SimConfig(seed=1234, numlayers=2, numobjs=25))


@pytest.fixture(scope="session")
def small_scene(small_pile):
    from rubblepile.render import Scene
    return Scene(small_pile)


@pytest.fixture(scope="session")
def ground_scene():
    """Scene with no instances: infinite ground plane only."""
    from rubblepile.deposition import Pile
    from rubblepile.render import Scene
    return Scene(Pile([], 0, 0, 0, None))
