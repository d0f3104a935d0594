"""Numerical tolerance knobs, overridable per call or through the CLI config."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Default tolerances sized for double precision at dimensions up to ~200."""

    sym_tol: float = 1e-12      # relative symmetry slack
    psd_tol: float = 1e-10      # relative eigenvalue floor for PSD checks
    recon_tol: float = 1e-10    # relative reconstruction error of factorizations
    orth_tol: float = 1e-10     # orthonormality slack and rank truncation
    cutoff_rel: float = 1e-12   # relative eigenvalue cutoff for pseudo-inverses
    sign_tol: float = 1e-12     # magnitude below which an entry cannot fix a sign
    range_tol: float = 1e-8     # relative out-of-range mass treated as infinite norm
    solve_tol: float = 1e-10    # relative residual allowed in ridge solves
    path_tol: float = 1e-8      # coefficient path identity tolerance
    align_tol: float = 1e-8     # final nuisance alignment tolerance


DEFAULT_TOLS = Tolerances()
