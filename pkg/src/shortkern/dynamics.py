"""The shorting iteration on positive operators.

One step conjugates the complement of an effect by the operator square root,
R -> R^{1/2} (I - T) R^{1/2}. Repeated steps under an effect schedule produce
a Loewner-decreasing trajectory; the mass removed per step, R^{1/2} T R^{1/2},
telescopes exactly to the total decrease. When every effect is supported in a
fixed subspace U the iteration leaves U^perp untouched, and if it exhausts U
the trajectory ends at the projection onto U^perp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLS, Tolerances
from .errors import (
    DimensionMismatch,
    EffectNotSupportedInU,
    NotConverged,
    ScheduleExhausted,
)
from .operators import (
    Effect,
    PsdOperator,
    SubspaceSpec,
    eigendecompose,
    orthogonal_projection,
    psd_sqrt,
    symmetrize,
    validate_effect,
)


@dataclass(frozen=True)
class StoppingRule:
    """Finite surrogate for strong convergence: stop when the Frobenius step
    delta falls to ``frob_tol`` or after ``max_steps`` recorded steps."""

    max_steps: int
    frob_tol: float

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not self.frob_tol > 0.0:
            raise ValueError("frob_tol must be positive")


class ConstantProjection:
    """Apply scale * P_U at every step, scale in (0, 1].

    Scale 1 shorts U away in a single step; smaller scales contract the
    U-block geometrically by (1 - scale) per step.
    """

    def __init__(self, subspace: SubspaceSpec, scale: float = 1.0,
                 tols: Tolerances = DEFAULT_TOLS):
        if not 0.0 < scale <= 1.0:
            raise ValueError(f"scale must lie in (0, 1], got {scale}")
        self.subspace = subspace
        self.scale = float(scale)
        self.tols = tols
        self._effect = validate_effect(
            scale * orthogonal_projection(subspace, tols=tols).entries, tols=tols)

    def effect_at(self, step: int, current: PsdOperator) -> Effect:
        return self._effect


class CovarianceSpectral:
    """Spectral projectors of a covariance operator above per-step thresholds.

    Step n uses the projection onto eigenvectors of sigma with eigenvalue at
    least thresholds[n]; the final threshold is reused once the list runs out.
    """

    def __init__(self, sigma: PsdOperator, thresholds, tols: Tolerances = DEFAULT_TOLS):
        thresholds = tuple(float(t) for t in thresholds)
        if not thresholds:
            raise ValueError("thresholds must be nonempty")
        if any(t < 0.0 for t in thresholds):
            raise ValueError("thresholds must be nonnegative")
        self.sigma = sigma
        self.thresholds = thresholds
        self.tols = tols
        self._dec = eigendecompose(sigma, tols=tols)

    def effect_at(self, step: int, current: PsdOperator) -> Effect:
        tau = self.thresholds[min(step, len(self.thresholds) - 1)]
        cols = self._dec.eigenvectors[:, self._dec.eigenvalues >= tau]
        return validate_effect(symmetrize(cols @ cols.T), tols=self.tols)


class Greedy:
    """Rank-one projection onto the top eigenvector of R^{1/2} B R^{1/2},
    the effect removing the most task energy per step."""

    def __init__(self, task: PsdOperator, tols: Tolerances = DEFAULT_TOLS):
        self.task = task
        self.tols = tols

    def effect_at(self, step: int, current: PsdOperator) -> Effect:
        from .energy import greedy_effect

        effect, _ = greedy_effect(self.task, current, tols=self.tols)
        return effect


class ExplicitList:
    """Replay a fixed, finite list of effects."""

    def __init__(self, effects):
        self.effects = tuple(effects)

    def effect_at(self, step: int, current: PsdOperator) -> Effect:
        if step >= len(self.effects):
            raise ScheduleExhausted(
                f"schedule has {len(self.effects)} effects, step {step} requested")
        return self.effects[step]


EffectSchedule = ConstantProjection | CovarianceSpectral | Greedy | ExplicitList


def next_effect(schedule: EffectSchedule, step: int, current: PsdOperator) -> Effect:
    """Effect the schedule produces for step ``step`` (0-based) at operator ``current``."""
    effect = schedule.effect_at(step, current)
    if effect.dim != current.dim:
        raise DimensionMismatch(
            f"schedule produced dimension {effect.dim}, operator has {current.dim}")
    return effect


@dataclass(frozen=True)
class Trajectory:
    """The recorded iteration R_0, ..., R_N with its per-step bookkeeping.

    ``increments[n]`` holds the removed mass at step n+1 and equals
    operators[n] - operators[n+1] up to reconstruction error;
    ``step_deltas[n]`` is the Frobenius norm of that difference.
    """

    operators: tuple[PsdOperator, ...]
    effects_used: tuple[Effect, ...]
    increments: tuple[PsdOperator, ...]
    step_deltas: tuple[float, ...]
    converged: bool

    def __len__(self) -> int:
        return len(self.effects_used)

    @property
    def initial(self) -> PsdOperator:
        return self.operators[0]

    @property
    def final(self) -> PsdOperator:
        return self.operators[-1]


def shorting_step(r: PsdOperator, t: Effect, tols: Tolerances = DEFAULT_TOLS) -> PsdOperator:
    """One shorting update R^{1/2} (I - T) R^{1/2}, re-symmetrized.

    The result is PSD and Loewner-below R.
    """
    if r.dim != t.dim:
        raise DimensionMismatch(f"operator dim {r.dim}, effect dim {t.dim}")
    s = psd_sqrt(r, tols=tols).entries
    out = s @ (np.eye(r.dim) - t.entries) @ s
    return PsdOperator(symmetrize(out), tols=tols)


def residual_increment(r: PsdOperator, t: Effect, tols: Tolerances = DEFAULT_TOLS) -> PsdOperator:
    """Removed mass R^{1/2} T R^{1/2}; equals R - shorting_step(R, T) up to rounding."""
    if r.dim != t.dim:
        raise DimensionMismatch(f"operator dim {r.dim}, effect dim {t.dim}")
    s = psd_sqrt(r, tols=tols).entries
    return PsdOperator(symmetrize(s @ t.entries @ s), tols=tols)


def _step_pair(r: PsdOperator, t: Effect, tols: Tolerances) -> tuple[PsdOperator, PsdOperator]:
    # Shares one square root between the update and its increment.
    s = psd_sqrt(r, tols=tols).entries
    removed = symmetrize(s @ t.entries @ s)
    nxt = symmetrize(s @ (np.eye(r.dim) - t.entries) @ s)
    return PsdOperator(nxt, tols=tols), PsdOperator(removed, tols=tols)


def run_trajectory(r0: PsdOperator, schedule: EffectSchedule, stop: StoppingRule,
                   tols: Tolerances = DEFAULT_TOLS) -> Trajectory:
    """Iterate shorting steps under ``schedule`` until a fixed point or ``max_steps``.

    A candidate step whose Frobenius delta is at or below ``frob_tol`` is a
    numerical fixed point: it is discarded, the trajectory is marked
    converged and iteration stops, so the recorded operators never contain a
    sub-tolerance step. Greedy schedules also stop (converged) as soon as the
    top eigenvalue of the conjugated task operator falls to ``frob_tol``,
    since later rank-one steps would only remove noise. An ExplicitList that
    runs out of effects ends the trajectory unconverged.
    """
    operators = [r0]
    effects: list[Effect] = []
    increments: list[PsdOperator] = []
    deltas: list[float] = []
    converged = False
    for n in range(stop.max_steps):
        current = operators[-1]
        if isinstance(schedule, Greedy):
            from .energy import greedy_effect

            effect, drop = greedy_effect(schedule.task, current, tols=tols)
            if drop <= stop.frob_tol:
                converged = True
                break
        else:
            try:
                effect = next_effect(schedule, n, current)
            except ScheduleExhausted:
                break
        nxt, removed = _step_pair(current, effect, tols)
        delta = float(np.linalg.norm(current.entries - nxt.entries))
        if delta <= stop.frob_tol:
            converged = True
            break
        operators.append(nxt)
        effects.append(effect)
        increments.append(removed)
        deltas.append(delta)
    return Trajectory(tuple(operators), tuple(effects), tuple(increments),
                      tuple(deltas), converged)


def telescoping_error(traj: Trajectory) -> float:
    """Frobenius defect of (R_0 - R_N) against the summed increments.

    Exact arithmetic makes this zero; in floats it only carries rounding.
    """
    first = traj.operators[0].entries
    last = traj.operators[-1].entries
    total = np.zeros_like(first)
    for inc in traj.increments:
        total = total + inc.entries
    return float(np.linalg.norm((first - last) - total))


def block_reduction_error(traj: Trajectory, u: SubspaceSpec,
                          tols: Tolerances = DEFAULT_TOLS) -> float:
    """Largest off-diagonal block of any R_n relative to the splitting U + U^perp.

    Requires every recorded effect to be supported in U (T = P_U T P_U within
    ``recon_tol``), else EffectNotSupportedInU. When the trajectory starts at
    the identity the returned maximum also folds in the deviation of the
    U^perp block from the identity, which the block reduction keeps fixed.
    """
    p_u = orthogonal_projection(u, tols=tols).entries
    dim = traj.operators[0].dim
    if p_u.shape[0] != dim:
        raise DimensionMismatch(f"subspace ambient dim {p_u.shape[0]}, trajectory dim {dim}")
    p_perp = np.eye(dim) - p_u
    for t in traj.effects_used:
        support_defect = float(np.linalg.norm(t.entries - p_u @ t.entries @ p_u))
        if support_defect > tols.recon_tol * (1.0 + float(np.linalg.norm(t.entries))):
            raise EffectNotSupportedInU(
                f"effect deviates from P_U T P_U by {support_defect:.3e}")
    err = 0.0
    for r in traj.operators:
        err = max(err, float(np.linalg.norm(p_perp @ r.entries @ p_u)))
    first = traj.operators[0].entries
    if float(np.linalg.norm(first - np.eye(dim))) <= tols.recon_tol * dim:
        for r in traj.operators:
            err = max(err, float(np.linalg.norm(p_perp @ (r.entries - first) @ p_perp)))
    return err


def exhaustion_check(traj: Trajectory, u: SubspaceSpec, tol: float) -> bool:
    """True iff the converged trajectory ended at the projection onto U^perp.

    This is the finite-dimensional surrogate for all quadratic forms over U
    decaying to zero. Raises NotConverged on an unconverged trajectory.
    """
    if not traj.converged:
        raise NotConverged("trajectory did not converge; limit is undefined")
    dim = traj.final.dim
    p_perp = np.eye(dim) - orthogonal_projection(u, tols=traj.final.tols).entries
    return float(np.linalg.norm(traj.final.entries - p_perp)) <= tol
