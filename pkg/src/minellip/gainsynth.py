"""Constructive consensus gain design and the input-constrained gamma sweep.

A single Riccati solve per gamma yields a gain that stabilizes every modal
subsystem ``A - lambda_i B K`` at once, hence the whole stacked error
dynamics. The outer sweep scans a gamma grid, minimizes the ellipsoid trace
for each candidate gain and keeps the smallest-trace design whose protocol
inputs respect the eta bound. The sweep is an exhaustive scan, so the
returned design is the best on the grid, not a certified global optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit
from .ellipsoid import MinimizationResult, check_input_bound, minimize_trace
from .errors import NoFeasibleDesignError, NoSpanningTreeError, NotStabilizableError
from .graph import LaplacianPair, has_spanning_tree
from .protocol import PlantModel

#: Default gamma sweep: 16 log-spaced points spanning four decades.
DEFAULT_GAMMA_GRID = tuple(np.geomspace(1e-2, 1e2, 16))


@dataclass(frozen=True, eq=False)
class DesignResult:
    """Gain selected by the sweep together with its certificates."""

    K: np.ndarray
    gamma: float
    riccati_P: np.ndarray
    minimization: MinimizationResult
    input_ok: bool


def _riccati_gain(plant: PlantModel, lp: LaplacianPair, gamma: float, q0):
    lam = matkit.eig_sym(lp.L_tilde)
    lam_min = float(lam[0])
    if lam_min <= 1e-8 * max(1.0, float(lam[-1])):
        raise NoSpanningTreeError("smallest reduced-Laplacian eigenvalue is not positive")
    p_are = matkit.are_solve(plant.A, plant.B, q0, gamma)
    k = (gamma / (2.0 * lam_min)) * (plant.B.T @ p_are)
    return k, p_are


def design_gain(plant: PlantModel, lp: LaplacianPair, gamma: float, q0=None) -> np.ndarray:
    """Consensus gain ``K = gamma / (2 lambda_min) B^T P`` from the Riccati
    solution ``P`` of ``A^T P + P A - gamma P B B^T P + q0 = 0``.

    With ``X = P^{-1}`` the strict inequality ``A X + X A^T - gamma B B^T < 0``
    holds, which makes every ``A - lambda_i B K`` Hurwitz for the reduced
    Laplacian eigenvalues ``lambda_i >= lambda_min > 0``.
    """
    if q0 is None:
        q0 = np.eye(plant.n)
    k, _ = _riccati_gain(plant, lp, gamma, q0)
    return k


def _pbh_stabilizable(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> bool:
    """PBH test: every eigenvalue of ``a`` with nonnegative real part must
    leave ``[a - lambda I, b]`` at full row rank."""
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a, "fro")))
    for lam in np.linalg.eigvals(a):
        if lam.real < -tol * scale:
            continue
        pencil = np.hstack([a - lam * np.eye(n), b]).astype(complex)
        sv = np.linalg.svd(pencil, compute_uv=False)
        if sv[-1] <= tol * max(float(sv[0]), 1.0):
            return False
    return True


def consensus_feasible(plant: PlantModel, lp: LaplacianPair) -> bool:
    """True when a linear consensus gain exists: spanning tree plus
    stabilizable (A, B)."""
    return has_spanning_tree(lp) and _pbh_stabilizable(plant.A, plant.B)


def optimize_gain(
    plant: PlantModel,
    lp: LaplacianPair,
    gamma_grid=None,
    q0=None,
    tol: float = 1e-8,
) -> DesignResult:
    """Sweep the gamma grid, keep input-feasible designs, return the one of
    smallest ellipsoid trace (ties broken by smaller gamma).

    Raises ``NoFeasibleDesignError`` when every grid point violates the
    input bound, ``NoSpanningTreeError`` / ``NotStabilizableError`` when the
    consensus preconditions fail.
    """
    if not has_spanning_tree(lp):
        raise NoSpanningTreeError("topology has no spanning tree rooted at the leader")
    if not _pbh_stabilizable(plant.A, plant.B):
        raise NotStabilizableError("(A, B) fails the PBH stabilizability test")
    if gamma_grid is None:
        gamma_grid = DEFAULT_GAMMA_GRID
    if q0 is None:
        q0 = np.eye(plant.n)

    best = None
    for gamma in gamma_grid:
        gamma = float(gamma)
        k, p_are = _riccati_gain(plant, lp, gamma, q0)
        minimization = minimize_trace(plant, lp, k, tol=tol)
        if not check_input_bound(lp, k, minimization.P_star, plant.eta):
            continue
        key = (minimization.trace_value, gamma)
        if best is None or key < best[0]:
            best = (key, DesignResult(
                K=k,
                gamma=gamma,
                riccati_P=p_are,
                minimization=minimization,
                input_ok=True,
            ))
    if best is None:
        raise NoFeasibleDesignError("every gamma on the grid violates the input bound")
    return best[1]
