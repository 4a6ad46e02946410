import time

import numpy as np
import pytest

from workzone import ClassRegistry, Rgb8Image
from workzone.synthgen import ObstacleSpec, SceneSpec

# The whole primary suite must stay under this wall-clock budget.
SUITE_BUDGET_SECONDS = 300.0


@pytest.fixture(scope="session", autouse=True)
def _suite_timer():
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    print(f"\n[SUITE] wall time {elapsed:.1f}s (budget {SUITE_BUDGET_SECONDS:.0f}s)")
    assert elapsed < SUITE_BUDGET_SECONDS, f"suite took {elapsed:.1f}s"


@pytest.fixture
def registry() -> ClassRegistry:
    return ClassRegistry.default()


@pytest.fixture
def make_scene():
    """Factory for small scenes: make_scene((class_id, depth, lateral), ...)."""

    def build(*objects, width=160, height=120, **kwargs) -> SceneSpec:
        obstacles = tuple(
            o if isinstance(o, ObstacleSpec) else ObstacleSpec(*o) for o in objects
        )
        return SceneSpec(width=width, height=height, obstacles=obstacles, **kwargs)

    return build


@pytest.fixture
def random_image():
    """Factory for deterministic random RGB images."""

    def build(width=32, height=24, seed=0) -> Rgb8Image:
        rng = np.random.Generator(np.random.PCG64(seed))
        return Rgb8Image(
            rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
        )

    return build
