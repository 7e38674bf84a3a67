import numpy as np
import pytest

from minellip import PlantModel, Topology, build_laplacian, minimize_trace


@pytest.fixture(scope="session")
def paper_plant():
    return PlantModel(
        A=[[0.0, 1.0], [0.0, 0.0]],
        B=[[0.0], [1.0]],
        E=np.eye(2),
        Q=np.diag([800.0, 4000.0]),
        eta=50000.0,
    )


@pytest.fixture(scope="session")
def fig1_topology():
    return Topology(
        adjacency=[
            [0.0, 0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 1.0],
            [1.0, 0.0, 0.0, 1.0],
            [0.0, 1.0, 1.0, 0.0],
        ]
    )


@pytest.fixture(scope="session")
def fig1_laplacian(fig1_topology):
    return build_laplacian(fig1_topology)


@pytest.fixture(scope="session")
def paper_gain():
    return np.array([[46.6001, 25.6217]])


@pytest.fixture(scope="session")
def paper_x0():
    return np.array([[0.0, 0.0], [1.0, 0.0], [0.6, 0.0], [0.1, 0.5]])


@pytest.fixture(scope="session")
def paper_minimization(paper_plant, fig1_laplacian, paper_gain):
    return minimize_trace(paper_plant, fig1_laplacian, paper_gain)


@pytest.fixture(scope="session")
def scalar_plant():
    return PlantModel(A=[[-1.0]], B=[[1.0]], E=[[1.0]], Q=[[1.0]], eta=10.0)


@pytest.fixture(scope="session")
def scalar_topology():
    return Topology(adjacency=[[0.0, 0.0], [1.0, 0.0]])


@pytest.fixture(scope="session")
def scalar_laplacian(scalar_topology):
    return build_laplacian(scalar_topology)


@pytest.fixture(scope="session")
def scalar_gain():
    return np.array([[0.0]])
