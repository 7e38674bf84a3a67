"""Invariant-ellipsoid analysis of the stacked error system.

The set ``{e : e^T P e <= 1}`` with symmetric positive definite P is
invariant for the disturbed error dynamics exactly when some S-procedure
multiplier beta > 0 makes the block matrix

    [ P A_cl + A_cl^T P + beta P    P (1_N (x) E) ]
    [ (1_N (x) E)^T P               -beta Q       ]

negative semidefinite. This module implements that test, the search over
beta for a given P, the one-parameter equality family along which the trace
of ``X = P^{-1}`` (the sum of squared ellipsoid semiaxes) is minimized, the
input-norm bound, and the worst-case admissible disturbance direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matkit
from .errors import BetaOutOfRangeError, DegenerateDirectionError, NotHurwitzError
from .graph import LaplacianPair
from .protocol import PlantModel, closed_loop

_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class InvarianceCertificate:
    """Outcome of the block-matrix invariance test at a fixed multiplier."""

    beta: float
    max_eig: float
    feasible: bool


@dataclass(frozen=True, eq=False)
class MinimizationResult:
    """Minimal-trace member of the one-parameter ellipsoid family."""

    beta_star: float
    X_star: np.ndarray
    P_star: np.ndarray
    trace_value: float
    beta_max: float


def _ones_e(plant: PlantModel, n_followers: int) -> np.ndarray:
    return np.kron(np.ones((n_followers, 1)), plant.E)


def _disturbance_gramian_rhs(plant: PlantModel, n_followers: int) -> np.ndarray:
    """The matrix ``(1_N (x) E) Q^{-1} (1_N (x) E)^T`` driving the family."""
    ones_e = _ones_e(plant, n_followers)
    g = ones_e @ np.linalg.solve(plant.Q, ones_e.T)
    return 0.5 * (g + g.T)


def invariance_block(plant: PlantModel, lp: LaplacianPair, k, P, beta: float) -> np.ndarray:
    """Assemble the symmetric block matrix of the invariance test."""
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    P = matkit.check_symmetric(P, name="P")
    a_cl = closed_loop(plant, lp, k)
    if P.shape != a_cl.shape:
        raise ValueError(f"P must be {a_cl.shape}, got {P.shape}")
    ones_e = _ones_e(plant, lp.L_tilde.shape[0])
    top = P @ a_cl + a_cl.T @ P + beta * P
    off = P @ ones_e
    return np.block([[top, off], [off.T, -beta * plant.Q]])


def check_invariant(
    plant: PlantModel, lp: LaplacianPair, k, P, beta: float, tol: float | None = None
) -> InvarianceCertificate:
    """Invariance test: feasible iff the block matrix is <= 0 up to ``tol``.

    The default tolerance is ``1e-7 * (1 + ||block||_2)``; entries of P can
    reach 1e3 and beyond on realistic data, so the test must be scale-aware.
    """
    block = invariance_block(plant, lp, k, P, beta)
    w = np.linalg.eigvalsh(block)
    max_eig = float(w[-1])
    if tol is None:
        tol = 1e-7 * (1.0 + float(np.abs(w).max()))
    return InvarianceCertificate(beta=float(beta), max_eig=max_eig, feasible=max_eig <= tol)


def _schur_max_eig(m0: np.ndarray, P: np.ndarray, pgp: np.ndarray, beta: float) -> float:
    return float(np.linalg.eigvalsh(m0 + beta * P + pgp / beta)[-1])


def find_beta(
    plant: PlantModel, lp: LaplacianPair, k, P, tol: float = 1e-9
) -> float | None:
    """Search for a multiplier beta > 0 certifying invariance of a given P.

    Works on the Schur complement ``M0 + beta P + (1/beta) P G P`` with
    ``G = (1_N (x) E) Q^{-1} (1_N (x) E)^T``, which is matrix-convex in beta
    on beta > 0, so its maximum eigenvalue is unimodal and the feasible set
    is an interval: a geometric grid brackets the minimizer and a
    golden-section shrink narrows the bracket to width ``tol`` (relative).
    Returns a feasible beta, or None when no multiplier exists.
    """
    P = matkit.check_symmetric(P, name="P")
    a_cl = closed_loop(plant, lp, k)
    m0 = P @ a_cl + a_cl.T @ P
    g = _disturbance_gramian_rhs(plant, lp.L_tilde.shape[0])
    pgp = P @ g @ P
    pgp = 0.5 * (pgp + pgp.T)

    grid = np.geomspace(1e-8, 1e8, 65)
    values = [_schur_max_eig(m0, P, pgp, b) for b in grid]
    i = int(np.argmin(values))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, grid.size - 1)]

    # Golden-section in log space: unimodality survives the monotone reparam.
    a, b = np.log(lo), np.log(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = _schur_max_eig(m0, P, pgp, float(np.exp(c)))
    fd = _schur_max_eig(m0, P, pgp, float(np.exp(d)))
    while (b - a) > max(tol, 1e-12):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = _schur_max_eig(m0, P, pgp, float(np.exp(c)))
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = _schur_max_eig(m0, P, pgp, float(np.exp(d)))
    beta = float(np.exp(0.5 * (a + b)))
    cert = check_invariant(plant, lp, k, P, beta)
    return beta if cert.feasible else None


def _family_raw(a_cl: np.ndarray, g: np.ndarray, beta: float, reg: float = 0.0) -> np.ndarray:
    n = a_cl.shape[0]
    shifted = a_cl + 0.5 * beta * np.eye(n)
    rhs = (g + reg * np.eye(n)) / beta
    return matkit.lyap_solve(shifted, rhs)


def family_solution(plant: PlantModel, lp: LaplacianPair, k, beta: float) -> np.ndarray:
    """Unique solution X of the equality family at multiplier ``beta``:

        (A_cl + beta/2 I) X + X (A_cl + beta/2 I)^T
            + (1/beta) (1_N (x) E) Q^{-1} (1_N (x) E)^T = 0.

    Requires A_cl Hurwitz and ``0 < beta < -2 * abscissa(A_cl)``.
    ``P = X^{-1}`` then satisfies the invariance block test with equality of
    its Schur complement.
    """
    a_cl = closed_loop(plant, lp, k)
    abscissa = matkit.spectrum(a_cl).spectral_abscissa
    if abscissa >= 0.0:
        raise NotHurwitzError(f"closed loop has spectral abscissa {abscissa:.3e} >= 0")
    beta_max = -2.0 * abscissa
    if not 0.0 < beta < beta_max:
        raise BetaOutOfRangeError(f"beta must lie in (0, {beta_max:.6g}), got {beta}")
    g = _disturbance_gramian_rhs(plant, lp.L_tilde.shape[0])
    x = _family_raw(a_cl, g, beta)
    w = np.linalg.eigvalsh(x)
    if w.min() <= 1e-10 * max(w.max(), 1e-300):
        # Error directions unreachable from the shared disturbance make the
        # Gramian singular; a tiny isotropic widening keeps X invertible and
        # the resulting certificate strictly feasible.
        reg = 1e-8 * max(float(np.linalg.eigvalsh(g).max()), 1e-30)
        x = _family_raw(a_cl, g, beta, reg=reg)
    return x


def minimize_trace(
    plant: PlantModel, lp: LaplacianPair, k, tol: float = 1e-8
) -> MinimizationResult:
    """Minimize ``tr(X)`` (sum of squared semiaxes of the ellipsoid of
    ``P = X^{-1}``) over the one-parameter equality family.

    A 50-point log-spaced pre-scan of ``(0, beta_max)`` brackets the
    minimizer and golden-section search narrows it to width ``tol``. The
    trace along the family is convex, so the bracket is reliable.
    """
    a_cl = closed_loop(plant, lp, k)
    abscissa = matkit.spectrum(a_cl).spectral_abscissa
    if abscissa >= 0.0:
        raise NotHurwitzError(f"closed loop has spectral abscissa {abscissa:.3e} >= 0")
    beta_max = -2.0 * abscissa
    g = _disturbance_gramian_rhs(plant, lp.L_tilde.shape[0])

    def trace_at(beta: float) -> float:
        return float(np.trace(_family_raw(a_cl, g, beta)))

    grid = beta_max * np.geomspace(1e-6, 1.0 - 1e-6, 50)
    values = [trace_at(b) for b in grid]
    i = int(np.argmin(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = trace_at(c), trace_at(d)
    while (b - a) > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = trace_at(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = trace_at(d)
    beta_star = 0.5 * (a + b)

    x_star = family_solution(plant, lp, k, beta_star)
    p_star = np.linalg.inv(x_star)
    p_star = 0.5 * (p_star + p_star.T)
    return MinimizationResult(
        beta_star=float(beta_star),
        X_star=x_star,
        P_star=p_star,
        trace_value=float(np.trace(x_star)),
        beta_max=float(beta_max),
    )


def check_input_bound(
    lp: LaplacianPair, k, P, eta: float, tol: float | None = None
) -> bool:
    """Input-norm certificate ``(L_tilde (x) K)^T (L_tilde (x) K) <= eta^2 P``.

    Evaluated both directly and through the equivalent Schur-complement block
    ``[[P, R^T], [R, eta^2 I]]`` with ``R = L_tilde (x) K``; both tests must
    agree for the bound to be reported as satisfied.
    """
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    P = matkit.check_symmetric(P, name="P")
    r = np.kron(lp.L_tilde, matkit.as_matrix(k, "K"))

    direct = eta**2 * P - r.T @ r
    w_direct = np.linalg.eigvalsh(0.5 * (direct + direct.T))
    tol_direct = 1e-7 * (1.0 + float(np.abs(w_direct).max())) if tol is None else tol
    ok_direct = bool(w_direct.min() >= -tol_direct)

    block = np.block([[P, r.T], [r, eta**2 * np.eye(r.shape[0])]])
    w_block = np.linalg.eigvalsh(block)
    tol_block = 1e-7 * (1.0 + float(np.abs(w_block).max())) if tol is None else tol
    ok_block = bool(w_block.min() >= -tol_block)

    return ok_direct and ok_block


def worst_disturbance(P, plant: PlantModel, e) -> np.ndarray:
    """Admissible disturbance maximizing the growth rate of ``e^T P e``:

        omega* = Q^{-1} (1_N (x) E)^T P e / || Q^{-1/2} (1_N (x) E)^T P e ||

    which satisfies ``omega*^T Q omega* = 1`` exactly. Raises
    ``DegenerateDirectionError`` when ``(1_N (x) E)^T P e`` vanishes.
    """
    P = matkit.check_symmetric(P, name="P")
    e = np.asarray(e, dtype=float).ravel()
    n_followers, rem = divmod(e.size, plant.n)
    if rem != 0 or P.shape != (e.size, e.size):
        raise ValueError(f"e of length {e.size} does not match P {P.shape} and n={plant.n}")
    v = _ones_e(plant, n_followers).T @ (P @ e)
    y = np.linalg.solve(plant.Q, v)
    s = float(v @ y)
    if s <= (1e-12 * (1.0 + float(np.linalg.norm(P @ e)))) ** 2:
        raise DegenerateDirectionError("P e is orthogonal to the disturbance channel")
    return y / np.sqrt(s)
