"""Dense symmetric PSD linear algebra substrate.

Validated positive semidefinite operators, effects (positive contractions),
orthonormalized subspaces, eigendecompositions, square roots, pseudo-inverses
and Loewner-order comparisons. Everything is dense double precision; products
are re-symmetrized as (M + M^T)/2 so that asymmetry cannot accumulate over
long iterations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLS, Tolerances
from .errors import (
    DegenerateBasis,
    DimensionMismatch,
    NotContraction,
    NotPsd,
    NumericalError,
)


def symmetrize(m: np.ndarray) -> np.ndarray:
    """Return (M + M^T)/2."""
    return 0.5 * (m + m.T)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


class PsdOperator:
    """Symmetric positive semidefinite matrix, validated at construction.

    Symmetry is checked to within ``sym_tol`` relative to the largest entry
    and positivity to within ``psd_tol`` relative to the largest eigenvalue.
    Instances are immutable; ``entries`` is a read-only array.
    """

    __slots__ = ("entries", "tols")

    def __init__(self, entries, tols: Tolerances = DEFAULT_TOLS):
        arr = np.asarray(entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatch(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise DimensionMismatch("dimension must be at least 1")
        scale = 1.0 + float(np.abs(arr).max())
        skew = float(np.abs(arr - arr.T).max())
        if skew > tols.sym_tol * scale:
            raise NotPsd(f"matrix is not symmetric: max |A - A^T| = {skew:.3e}")
        arr = symmetrize(arr)
        w = np.linalg.eigvalsh(arr)
        if w[0] < -tols.psd_tol * (1.0 + max(float(w[-1]), 0.0)):
            raise NotPsd(f"matrix is not PSD: min eigenvalue {w[0]:.3e}")
        self.entries = _readonly(arr)
        self.tols = tols

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int, tols: Tolerances = DEFAULT_TOLS) -> "PsdOperator":
        return cls(np.eye(dim), tols=tols)

    @classmethod
    def zero(cls, dim: int, tols: Tolerances = DEFAULT_TOLS) -> "PsdOperator":
        return cls(np.zeros((dim, dim)), tols=tols)

    def __repr__(self) -> str:
        return f"PsdOperator(dim={self.dim})"


class Effect(PsdOperator):
    """Positive contraction 0 <= T <= I, the amount removed per direction."""

    __slots__ = ()

    def __init__(self, entries, tols: Tolerances = DEFAULT_TOLS):
        super().__init__(entries, tols=tols)
        w_max = float(np.linalg.eigvalsh(self.entries)[-1])
        if w_max > 1.0 + tols.psd_tol:
            raise NotContraction(f"largest eigenvalue {w_max:.12g} exceeds 1")

    @property
    def op(self) -> PsdOperator:
        """The underlying PSD operator (identity view; Effect is one)."""
        return self

    def __repr__(self) -> str:
        return f"Effect(dim={self.dim})"


def validate_effect(op: PsdOperator, tols: Tolerances = DEFAULT_TOLS) -> Effect:
    """Check 0 <= op <= I and wrap ``op`` unchanged as an Effect.

    Raises NotContraction when an eigenvalue exceeds 1 + psd_tol, NotPsd
    when the symmetry/PSD invariant fails.
    """
    if not isinstance(op, PsdOperator):
        op = PsdOperator(op, tols=tols)
    return Effect(op.entries, tols=tols)


class SubspaceSpec:
    """Orthonormal basis of a subspace of R^D.

    Raw spanning vectors are orthonormalized by modified Gram-Schmidt with a
    re-orthogonalization pass. A vector whose residual falls below
    ``orth_tol`` relative to its norm is linearly dependent on its
    predecessors; by default it is dropped (rank truncation), with
    ``strict=True`` it raises DegenerateBasis.
    """

    __slots__ = ("ambient_dim", "basis", "tols")

    def __init__(self, ambient_dim: int, vectors=(), tols: Tolerances = DEFAULT_TOLS,
                 strict: bool = False):
        ambient_dim = int(ambient_dim)
        if ambient_dim < 1:
            raise DimensionMismatch("ambient dimension must be at least 1")
        cols: list[np.ndarray] = []
        for v in vectors:
            v = np.asarray(v, dtype=float).reshape(-1)
            if v.shape[0] != ambient_dim:
                raise DimensionMismatch(
                    f"basis vector has length {v.shape[0]}, ambient dim is {ambient_dim}")
            w = v.copy()
            for _ in range(2):
                for q in cols:
                    w -= (q @ w) * q
            norm_w = float(np.linalg.norm(w))
            if norm_w <= tols.orth_tol * max(float(np.linalg.norm(v)), 1.0):
                if strict:
                    raise DegenerateBasis(
                        "spanning vector is linearly dependent on its predecessors")
                continue
            cols.append(w / norm_w)
        if len(cols) > ambient_dim:
            raise DegenerateBasis("more independent vectors than ambient dimension")
        basis = np.column_stack(cols) if cols else np.zeros((ambient_dim, 0))
        self.ambient_dim = ambient_dim
        self.basis = _readonly(basis)
        self.tols = tols

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    def complement(self) -> "SubspaceSpec":
        """Orthonormal basis of the orthogonal complement."""
        d = self.ambient_dim
        p = self.basis @ self.basis.T
        vals, vecs = np.linalg.eigh(np.eye(d) - p)
        keep = vals > 0.5
        return SubspaceSpec(d, vecs[:, keep].T, tols=self.tols)

    def __repr__(self) -> str:
        return f"SubspaceSpec(ambient_dim={self.ambient_dim}, rank={self.rank})"


@dataclass(frozen=True)
class EigenDecomposition:
    """Spectral factorization A = Q diag(w) Q^T with w sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigendecompose(a: PsdOperator, tols: Tolerances = DEFAULT_TOLS) -> EigenDecomposition:
    """Symmetric eigendecomposition sorted descending, ties kept in solver order.

    Verifies the reconstruction against ``recon_tol`` relative to the
    Frobenius norm of the input and the orthonormality of the column set.
    """
    vals, vecs = np.linalg.eigh(a.entries)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    scale = max(float(np.linalg.norm(a.entries)), 1e-300)
    recon = float(np.linalg.norm((vecs * vals) @ vecs.T - a.entries))
    if recon > tols.recon_tol * scale:
        raise NumericalError(f"eigendecomposition defect {recon:.3e} at scale {scale:.3e}")
    orth = float(np.abs(vecs.T @ vecs - np.eye(a.dim)).max())
    if orth > tols.orth_tol:
        raise NumericalError(f"eigenvector set deviates from orthonormal by {orth:.3e}")
    return EigenDecomposition(_readonly(vals), _readonly(vecs))


def psd_sqrt(a: PsdOperator, tols: Tolerances = DEFAULT_TOLS) -> PsdOperator:
    """Symmetric PSD square root via eigendecomposition.

    Eigenvalues in [-psd_tol*(1+lam_max), 0) are clipped to zero before the
    root; anything lower raises NotPsd.
    """
    vals, vecs = np.linalg.eigh(a.entries)
    lam_max = max(float(vals[-1]), 0.0)
    if vals[0] < -tols.psd_tol * (1.0 + lam_max):
        raise NotPsd(f"cannot take square root, min eigenvalue {vals[0]:.3e}")
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    return PsdOperator(symmetrize(root), tols=tols)


def loewner_leq(a: PsdOperator, b: PsdOperator, tol: float = DEFAULT_TOLS.psd_tol) -> bool:
    """True iff A <= B in the Loewner order, within tol relative to ||B||_2."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions {a.dim} and {b.dim} differ")
    diff_min = float(np.linalg.eigvalsh(b.entries - a.entries)[0])
    b_norm = float(np.linalg.eigvalsh(b.entries)[-1])
    return diff_min >= -tol * (1.0 + b_norm)


def pseudo_inverse(a: PsdOperator, cutoff_rel: float = DEFAULT_TOLS.cutoff_rel,
                   tols: Tolerances = DEFAULT_TOLS) -> PsdOperator:
    """Moore-Penrose pseudo-inverse truncated at ``cutoff_rel`` times the top eigenvalue.

    Eigenvalues above the cutoff are inverted, the rest zeroed. The zero
    matrix maps to the zero matrix.
    """
    vals, vecs = np.linalg.eigh(a.entries)
    lam_max = max(float(vals[-1]), 0.0)
    keep = vals > cutoff_rel * lam_max
    keep &= vals > 0.0
    inv = np.where(keep, 1.0 / np.where(keep, vals, 1.0), 0.0)
    return PsdOperator(symmetrize((vecs * inv) @ vecs.T), tols=tols)


def orthogonal_projection(u: SubspaceSpec, tols: Tolerances = DEFAULT_TOLS) -> PsdOperator:
    """Orthogonal projection onto the subspace; I - P projects onto the complement."""
    p = u.basis @ u.basis.T
    return PsdOperator(symmetrize(p), tols=tols)


def top_eigenpair(a: PsdOperator, tols: Tolerances = DEFAULT_TOLS) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and a unit eigenvector.

    Ties break toward the lowest column index of the decomposition. The sign
    is fixed so the first entry with magnitude above ``sign_tol`` is positive.
    """
    dec = eigendecompose(a, tols=tols)
    lam = float(dec.eigenvalues[0])
    w = dec.eigenvectors[:, 0].copy()
    nonzero = np.flatnonzero(np.abs(w) > tols.sign_tol)
    if nonzero.size and w[nonzero[0]] < 0.0:
        w = -w
    return lam, _readonly(w)
