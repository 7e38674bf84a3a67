"""Plant model and the linear consensus protocol.

The leader evolves as ``sigma0' = A sigma0 + B u0`` and each follower as
``sigma_i' = A sigma_i + B u_i + E omega`` with a shared disturbance omega
bounded by ``omega^T Q omega <= 1``. The protocol feeds each follower the
weighted state differences to its neighbours plus the known leader input,
so the stacked follower-minus-leader error obeys a linear system driven
only by the disturbance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit
from .errors import DimensionMismatchError
from .graph import LaplacianPair, Topology


@dataclass(eq=False)
class PlantModel:
    """Agent dynamics (A, B), disturbance channel E with bound Q, input bound eta."""

    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    Q: np.ndarray
    eta: float

    def __post_init__(self):
        self.A = matkit.as_matrix(self.A, "A")
        self.B = matkit.as_matrix(self.B, "B")
        self.E = matkit.as_matrix(self.E, "E")
        n = self.A.shape[0]
        if self.A.shape != (n, n):
            raise DimensionMismatchError(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise DimensionMismatchError(f"B must have {n} rows, got {self.B.shape}")
        if self.E.shape[0] != n:
            raise DimensionMismatchError(f"E must have {n} rows, got {self.E.shape}")
        self.Q = matkit.check_symmetric(self.Q, name="Q")
        if self.Q.shape != (self.p, self.p):
            raise DimensionMismatchError(f"Q must be {self.p}x{self.p}, got {self.Q.shape}")
        if not matkit.is_pd(self.Q):
            raise ValueError("Q must be positive definite")
        self.eta = float(self.eta)
        if self.eta <= 0.0:
            raise ValueError("eta must be positive")

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def p(self) -> int:
        return self.E.shape[1]


def check_gain(plant: PlantModel, k) -> np.ndarray:
    """Validate a feedback gain against the plant dimensions (m x n)."""
    k = matkit.as_matrix(k, "K")
    if k.shape != (plant.m, plant.n):
        raise DimensionMismatchError(f"K must be {plant.m}x{plant.n}, got {k.shape}")
    return k


def closed_loop(plant: PlantModel, lp: LaplacianPair, k) -> np.ndarray:
    """Stacked closed-loop error matrix ``I_N (x) A - L_tilde (x) B K``."""
    k = check_gain(plant, k)
    n_followers = lp.L_tilde.shape[0]
    return np.kron(np.eye(n_followers), plant.A) - np.kron(lp.L_tilde, plant.B @ k)


def control_inputs(plant: PlantModel, topology: Topology, k, states, u0) -> np.ndarray:
    """Per-follower protocol inputs from absolute states.

    ``states`` stacks the leader state (row 0) and the N follower states;
    row i of the result is ``K sum_j c_ij (sigma_j - sigma_i) + u0``.
    """
    k = check_gain(plant, k)
    n_followers = topology.follower_count
    states = np.asarray(states, dtype=float)
    if states.shape != (n_followers + 1, plant.n):
        raise DimensionMismatchError(
            f"states must be {(n_followers + 1, plant.n)}, got {states.shape}"
        )
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    if u0.shape != (plant.m,):
        raise DimensionMismatchError(f"u0 must have length {plant.m}, got {u0.shape}")
    weights = topology.adjacency
    out = np.empty((n_followers, plant.m))
    for i in range(1, n_followers + 1):
        consensus_term = (weights[i][:, None] * (states - states[i])).sum(axis=0)
        out[i - 1] = k @ consensus_term + u0
    return out


def stacked_control(lp: LaplacianPair, k, e, u0) -> np.ndarray:
    """Protocol inputs expressed through the stacked error:
    ``u = -(L_tilde (x) K) e + 1_N (x) u0``."""
    k = matkit.as_matrix(k, "K")
    e = np.asarray(e, dtype=float).ravel()
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    n_followers = lp.L_tilde.shape[0]
    return -np.kron(lp.L_tilde, k) @ e + np.tile(u0, n_followers)


def error_rhs(plant: PlantModel, lp: LaplacianPair, k, e, omega) -> np.ndarray:
    """Right-hand side of the stacked error dynamics,
    ``(I_N (x) A - L_tilde (x) B K) e + 1_N (x) E omega``."""
    e = np.asarray(e, dtype=float).ravel()
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    n_followers = lp.L_tilde.shape[0]
    if e.shape != (n_followers * plant.n,):
        raise DimensionMismatchError(f"e must have length {n_followers * plant.n}, got {e.shape}")
    if omega.shape != (plant.p,):
        raise DimensionMismatchError(f"omega must have length {plant.p}, got {omega.shape}")
    return closed_loop(plant, lp, k) @ e + np.tile(plant.E @ omega, n_followers)
