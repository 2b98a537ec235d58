import numpy as np
import pytest

from decor_uniform import corpus
from decor_uniform.delaunay import ConformalState, delaunay_margins, evaluate_at
from decor_uniform.errors import FlipForbiddenError


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def tetra_state():
    return ConformalState.from_metric(*corpus.tetrahedron_problem())


@pytest.fixture
def torus_state():
    return ConformalState.from_metric(*corpus.torus_problem())


@pytest.fixture
def genus2_state():
    return ConformalState.from_metric(*corpus.genus2_problem())


def random_state(builder, rng, sigma=0.25, min_margin=None, max_tries=40):
    """Walk a fresh corpus state to a random factor; optionally require interior margins.

    Retries when the walk leaves the simplicial weighted Delaunay regime or
    lands too close to a cell wall.
    """
    for _ in range(max_tries):
        state = ConformalState.from_metric(*builder())
        u = rng.normal(0.0, sigma, state.mesh.vertex_count)
        try:
            evaluate_at(state, u)
        except FlipForbiddenError:
            continue
        if min_margin is None or min(delaunay_margins(state).values()) > min_margin:
            return state
    raise RuntimeError(f"no usable random state after {max_tries} tries (sigma={sigma})")
