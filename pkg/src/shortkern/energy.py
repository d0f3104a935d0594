"""Task-operator energy bookkeeping and greedy rank-one effect selection.

The energy of a state R against a task operator B is the trace pairing
tr(B R). A shorting step along an effect T lowers it by the Hilbert-Schmidt
overlap of T with the conjugated task operator R^{1/2} B R^{1/2}; among
rank-one effects the top eigenvector of that conjugate removes the most.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .config import DEFAULT_TOLS, Tolerances
from .errors import DimensionMismatch, NumericalError
from .operators import (
    Effect,
    PsdOperator,
    psd_sqrt,
    symmetrize,
    top_eigenpair,
    validate_effect,
)

if TYPE_CHECKING:
    from .dynamics import Trajectory


def task_energy(b: PsdOperator, r: PsdOperator) -> float:
    """Trace pairing tr(B R); equals tr(R^{1/2} B R^{1/2}) by cyclicity."""
    if b.dim != r.dim:
        raise DimensionMismatch(f"task dim {b.dim}, operator dim {r.dim}")
    return float(np.sum(b.entries * r.entries))


def conjugate_task(b: PsdOperator, r: PsdOperator,
                   tols: Tolerances = DEFAULT_TOLS) -> PsdOperator:
    """R^{1/2} B R^{1/2}, re-symmetrized; vanishes on the kernel of R."""
    if b.dim != r.dim:
        raise DimensionMismatch(f"task dim {b.dim}, operator dim {r.dim}")
    s = psd_sqrt(r, tols=tols).entries
    return PsdOperator(symmetrize(s @ b.entries @ s), tols=tols)


def energy_drop(b: PsdOperator, r: PsdOperator, t: Effect,
                tols: Tolerances = DEFAULT_TOLS) -> float:
    """Energy removed by one step along t: the pairing tr(R^{1/2} B R^{1/2} T)."""
    if t.dim != r.dim:
        raise DimensionMismatch(f"effect dim {t.dim}, operator dim {r.dim}")
    return float(np.sum(conjugate_task(b, r, tols=tols).entries * t.entries))


def greedy_effect(b: PsdOperator, r: PsdOperator,
                  tols: Tolerances = DEFAULT_TOLS) -> tuple[Effect, float]:
    """Rank-one effect with the largest possible energy drop, and that drop.

    The effect projects onto the top eigenvector of R^{1/2} B R^{1/2}; the
    drop equals its top eigenvalue.
    """
    lam, w = top_eigenpair(conjugate_task(b, r, tols=tols), tols=tols)
    return validate_effect(np.outer(w, w), tols=tols), lam


@dataclass(frozen=True)
class EnergyLedger:
    """Per-step energies E_n = tr(B R_n) and the Hilbert-Schmidt drops.

    Energies are nonincreasing; drops[n] equals energies[n] - energies[n+1]
    up to rounding.
    """

    energies: tuple[float, ...]
    drops: tuple[float, ...]


def energy_ledger(traj: "Trajectory", b: PsdOperator,
                  tols: Tolerances = DEFAULT_TOLS) -> EnergyLedger:
    """Energy along a trajectory, with drops cross-checked two ways.

    The drop at step n is computed both as the energy difference and as the
    Hilbert-Schmidt pairing with the conjugated task operator; a disagreement
    beyond 1e-9 relative to (1 + E_0) raises NumericalError.
    """
    energies = tuple(task_energy(b, r) for r in traj.operators)
    drops = tuple(energy_drop(b, traj.operators[n], traj.effects_used[n], tols=tols)
                  for n in range(len(traj)))
    scale = 1.0 + abs(energies[0]) if energies else 1.0
    for n, drop in enumerate(drops):
        diff = energies[n] - energies[n + 1]
        if abs(drop - diff) > 1e-9 * scale:
            raise NumericalError(
                f"energy drop mismatch at step {n}: pairing {drop:.12e}, diff {diff:.12e}")
        if diff < -1e-10 * scale:
            raise NumericalError(f"energy increased at step {n} by {-diff:.3e}")
    return EnergyLedger(energies, drops)
