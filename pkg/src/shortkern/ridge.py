"""Kernel ridge regression along a shorting trajectory.

Each trajectory step yields a Gram operator and a ridge solve
(G_n + lambda I) c_n = y. The coefficient path moves by exactly
(G_{n+1} + lambda I)^{-1} dG^{(n)} c_n per step, where dG^{(n)} is the Gram
increment removed at that step, so the predictors evolve by accountable
residual contributions rather than refitting from scratch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .config import DEFAULT_TOLS, Tolerances
from .dynamics import Trajectory
from .errors import DimensionMismatch, NumericalError
from .kernels import FeatureMap, GramOperator, gram_increment, gram_operator
from .operators import PsdOperator


class Labels:
    """Vector labels y_1, ..., y_m in R^d, stacked row-major over (point, coord)."""

    __slots__ = ("values",)

    def __init__(self, values):
        arr = np.asarray(values, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise DimensionMismatch(f"labels must be m x d, got shape {arr.shape}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.values = arr

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def stacked(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass(frozen=True)
class RidgeConfig:
    """Ridge parameter; never defaulted, every experiment names its lambda."""

    lam: float

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive, got {self.lam}")


def _check_shapes(g: GramOperator, y: Labels) -> None:
    if (g.m, g.d) != (y.m, y.d):
        raise DimensionMismatch(
            f"Gram is m={g.m}, d={g.d} but labels are m={y.m}, d={y.d}")


def _refined_solve(a: np.ndarray, factor, rhs: np.ndarray, tol: float) -> np.ndarray:
    # One factorization, a few refinement passes; keeps the residual at
    # tol * ||rhs|| even when lambda is tiny against the top of the spectrum.
    x = cho_solve(factor, rhs)
    scale = max(float(np.linalg.norm(rhs)), 1e-300)
    for _ in range(3):
        r = rhs - a @ x
        if float(np.linalg.norm(r)) <= tol * scale:
            break
        x = x + cho_solve(factor, r)
    return x


def krr_fit(g: GramOperator, y: Labels, cfg: RidgeConfig,
            tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Solve (G + lambda I) c = y with a dense SPD factorization."""
    _check_shapes(g, y)
    a = g.matrix + cfg.lam * np.eye(g.matrix.shape[0])
    c = _refined_solve(a, cho_factor(a, lower=True), y.stacked, tols.solve_tol)
    y_norm = float(np.linalg.norm(y.stacked))
    resid = float(np.linalg.norm(a @ c - y.stacked))
    if resid > tols.solve_tol * max(y_norm, 1e-300):
        raise NumericalError(f"ridge solve residual {resid:.3e} exceeds tolerance")
    return c


@dataclass(frozen=True)
class Predictor:
    """KRR predictor f(t) = sum_i (t^T R V(s_i)) c_i for one trajectory step."""

    feature_map: FeatureMap
    operator: PsdOperator
    coefficients: np.ndarray


def krr_predict(p: Predictor, t_feature) -> np.ndarray:
    """Evaluate the predictor at a probe point with feature matrix t_feature."""
    t = np.asarray(t_feature, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    if t.shape != (p.feature_map.feature_dim, p.feature_map.output_dim):
        raise DimensionMismatch(
            f"probe feature shape {t.shape}, expected "
            f"{(p.feature_map.feature_dim, p.feature_map.output_dim)}")
    vx = p.feature_map.assemble()
    if p.coefficients.shape[0] != vx.shape[1]:
        raise DimensionMismatch("coefficient length does not match the feature map")
    return t.T @ (p.operator.entries @ (vx @ p.coefficients))


@dataclass(frozen=True)
class KrrPath:
    """Ridge state along a trajectory: Grams, increments, coefficients,
    per-step coefficient jumps, and their pairings with the coefficients.

    ``path_residuals[n]`` is (G_{n+1} + lambda I)^{-1} dG^{(n)} c_n and equals
    coefficients[n+1] - coefficients[n] up to the path tolerance. The
    pairing <c_n, path_residuals[n]> is reported as a sign diagnostic only.
    """

    grams: tuple[GramOperator, ...]
    increments: tuple[GramOperator, ...]
    coefficients: tuple[np.ndarray, ...]
    path_residuals: tuple[np.ndarray, ...]
    pairings: tuple[float, ...]
    trajectory: Trajectory
    labels: Labels
    ridge: RidgeConfig

    def predictor(self, n: int, v: FeatureMap) -> Predictor:
        return Predictor(v, self.trajectory.operators[n], self.coefficients[n])


def krr_path(traj: Trajectory, v: FeatureMap, y: Labels, cfg: RidgeConfig,
             tols: Tolerances = DEFAULT_TOLS) -> KrrPath:
    """Fit every trajectory step and decompose the coefficient path.

    One SPD factorization per step serves both the fit and the residual
    solve. The recovered identity c_{n+1} - c_n = path_residuals[n] is
    verified to ``path_tol`` relative to (1 + ||y||).
    """
    if v.feature_dim != traj.operators[0].dim:
        raise DimensionMismatch(
            f"feature dim {v.feature_dim}, trajectory dim {traj.operators[0].dim}")
    grams = [gram_operator(v, r, tols=tols) for r in traj.operators]
    _check_shapes(grams[0], y)
    size = grams[0].matrix.shape[0]
    eye = np.eye(size)
    y_vec = y.stacked
    y_norm = float(np.linalg.norm(y_vec))

    coefficients: list[np.ndarray] = []
    increments: list[GramOperator] = []
    residuals: list[np.ndarray] = []
    a = grams[0].matrix + cfg.lam * eye
    coefficients.append(_refined_solve(a, cho_factor(a, lower=True), y_vec, tols.solve_tol))
    for n in range(len(traj)):
        inc = gram_increment(v, traj.operators[n], traj.effects_used[n], tols=tols)
        increments.append(inc)
        a = grams[n + 1].matrix + cfg.lam * eye
        factor = cho_factor(a, lower=True)
        coefficients.append(_refined_solve(a, factor, y_vec, tols.solve_tol))
        residuals.append(_refined_solve(a, factor, inc.matrix @ coefficients[n],
                                        tols.solve_tol))
        defect = float(np.linalg.norm(
            (coefficients[n + 1] - coefficients[n]) - residuals[n]))
        if defect > tols.path_tol * (1.0 + y_norm):
            raise NumericalError(
                f"coefficient path identity failed at step {n}: defect {defect:.3e}")
    pairings = tuple(float(coefficients[n] @ residuals[n]) for n in range(len(residuals)))
    return KrrPath(tuple(grams), tuple(increments),
                   tuple(np.ascontiguousarray(c) for c in coefficients),
                   tuple(residuals), pairings, traj, y, cfg)


def nuisance_alignment(path: KrrPath, v: FeatureMap, g_feature, r0: PsdOperator,
                       tols: Tolerances = DEFAULT_TOLS) -> list[float]:
    """Overlap of each step's predictor with a nuisance feature direction.

    The predictor at step n has feature-space representative
    u_n = sum_i R_n V(s_i) c_{n,i}; the returned entry is <u_n, g_feature>,
    which realizes the inner product against g in the starting geometry when
    the trajectory begins at the identity. The caller asserts that g_feature
    lies in the shorted subspace; after an exhausting trajectory the final
    entry decays below ``align_tol``.
    """
    g = np.asarray(g_feature, dtype=float).reshape(-1)
    dim = v.feature_dim
    if g.shape[0] != dim:
        raise DimensionMismatch(f"direction length {g.shape[0]}, feature dim {dim}")
    if r0.dim != dim:
        raise DimensionMismatch(f"starting operator dim {r0.dim}, feature dim {dim}")
    vx = v.assemble()
    out = []
    for n, c in enumerate(path.coefficients):
        u_n = path.trajectory.operators[n].entries @ (vx @ c)
        out.append(float(u_n @ g))
    return out
