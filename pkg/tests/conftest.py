import numpy as np
import pytest

from radmesh import MovingMesh, ReferenceGrid, uniform_mesh


def perturbed_mesh(M, N, amplitude=0.03, seed=0, t=0.0):
    """Random non-folded mesh honoring the boundary correspondence."""
    from radmesh.adaptation import _flow_valid

    g = ReferenceGrid(M, N)
    for trial in range(50):
        rng = np.random.default_rng(seed + 1000 * trial)
        x, y = g.xi_eta()
        x = x + amplitude * rng.standard_normal(g.shape)
        y = y + amplitude * rng.standard_normal(g.shape)
        x[0, :], x[-1, :] = 0.0, 1.0
        y[:, 0], y[:, -1] = 0.0, 1.0
        # keep edge nodes strictly ordered along their edges
        x[:, 0] = np.sort(x[:, 0]); x[:, -1] = np.sort(x[:, -1])
        y[0, :] = np.sort(y[0, :]); y[-1, :] = np.sort(y[-1, :])
        x[(0, -1), 0] = (0.0, 1.0); x[(0, -1), -1] = (0.0, 1.0)
        y[0, (0, -1)] = (0.0, 1.0); y[-1, (0, -1)] = (0.0, 1.0)
        mesh = MovingMesh(g, x, y, t)
        if _flow_valid(mesh):
            return mesh
    raise RuntimeError("could not draw a valid random mesh")


@pytest.fixture
def identity_mesh_5():
    return uniform_mesh(ReferenceGrid(5, 5))
