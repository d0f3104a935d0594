"""Finite feature maps, the kernels they induce, and Gram-level dynamics.

A feature map assigns each sample point a D x d matrix V(s); together with a
positive operator R it induces the matrix-valued kernel V(s)^T R V(t). Over a
fixed sample the kernel assembles into an (m d) x (m d) Gram operator whose
evolution under shorting inherits positivity, Loewner monotonicity and the
telescoping residual decomposition from the operator level.
"""

from __future__ import annotations

import math

import numpy as np

from .config import DEFAULT_TOLS, Tolerances
from .dynamics import residual_increment
from .errors import DimensionMismatch, IndexOutOfRange, NotPsd
from .operators import Effect, PsdOperator, symmetrize, validate_effect


class FeatureMap:
    """Sample points and their D x d feature matrices.

    Blocks of stacked vectors are laid out row-major over (point, output
    coordinate): entry i*d + k belongs to point i, coordinate k. The scalar
    case d = 1 is the common one; larger d shares the same layout.
    """

    __slots__ = ("matrices", "points", "tols")

    def __init__(self, matrices, points=None, tols: Tolerances = DEFAULT_TOLS):
        mats = [np.asarray(m, dtype=float) for m in matrices]
        if not mats:
            raise DimensionMismatch("feature map needs at least one sample point")
        for m in mats:
            if m.ndim != 2 or m.shape != mats[0].shape:
                raise DimensionMismatch("all feature matrices must share one D x d shape")
        stacked = np.ascontiguousarray(np.stack(mats))
        stacked.setflags(write=False)
        self.matrices = stacked
        self.points = tuple(points) if points is not None else tuple(range(len(mats)))
        if len(self.points) != len(mats):
            raise DimensionMismatch("points and matrices must have equal length")
        self.tols = tols

    @property
    def sample_count(self) -> int:
        return self.matrices.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.matrices.shape[1]

    @property
    def output_dim(self) -> int:
        return self.matrices.shape[2]

    def matrix(self, i: int) -> np.ndarray:
        if not 0 <= i < self.sample_count:
            raise IndexOutOfRange(f"point index {i} outside 0..{self.sample_count - 1}")
        return self.matrices[i]

    def assemble(self) -> np.ndarray:
        """The D x (m d) sampling matrix whose column i*d + k is V(s_i)[:, k]."""
        m, dim, d = self.matrices.shape
        return self.matrices.transpose(1, 0, 2).reshape(dim, m * d)


class GramOperator:
    """Symmetric PSD (m d) x (m d) matrix of kernel blocks over a sample."""

    __slots__ = ("matrix", "m", "d", "tols")

    def __init__(self, matrix, m: int, d: int, tols: Tolerances = DEFAULT_TOLS):
        arr = np.asarray(matrix, dtype=float)
        if arr.shape != (m * d, m * d):
            raise DimensionMismatch(f"expected shape {(m * d, m * d)}, got {arr.shape}")
        scale = 1.0 + (float(np.abs(arr).max()) if arr.size else 0.0)
        if float(np.abs(arr - arr.T).max()) > tols.sym_tol * scale:
            raise NotPsd("Gram operator is not block-symmetric")
        arr = symmetrize(arr)
        w = np.linalg.eigvalsh(arr)
        if w[0] < -tols.psd_tol * (1.0 + max(float(w[-1]), 0.0)):
            raise NotPsd(f"Gram operator is not PSD: min eigenvalue {w[0]:.3e}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        self.matrix = arr
        self.m = int(m)
        self.d = int(d)
        self.tols = tols

    def block(self, i: int, j: int) -> np.ndarray:
        if not (0 <= i < self.m and 0 <= j < self.m):
            raise IndexOutOfRange(f"block ({i}, {j}) outside {self.m} x {self.m} grid")
        d = self.d
        return self.matrix[i * d:(i + 1) * d, j * d:(j + 1) * d]

    def __repr__(self) -> str:
        return f"GramOperator(m={self.m}, d={self.d})"


class ContractionWitness:
    """A positive contraction representing a kernel dominated by the original."""

    __slots__ = ("op",)

    def __init__(self, op: PsdOperator, tols: Tolerances = DEFAULT_TOLS):
        self.op = validate_effect(op, tols=tols)

    @property
    def dim(self) -> int:
        return self.op.dim


def kernel_eval(v: FeatureMap, r: PsdOperator, i: int, j: int) -> np.ndarray:
    """Kernel block V(s_i)^T R V(s_j) as a plain d x d array."""
    if r.dim != v.feature_dim:
        raise DimensionMismatch(f"operator dim {r.dim}, feature dim {v.feature_dim}")
    return v.matrix(i).T @ r.entries @ v.matrix(j)


def gram_operator(v: FeatureMap, r: PsdOperator,
                  tols: Tolerances = DEFAULT_TOLS) -> GramOperator:
    """Assemble all kernel blocks over the sample into one Gram operator."""
    if r.dim != v.feature_dim:
        raise DimensionMismatch(f"operator dim {r.dim}, feature dim {v.feature_dim}")
    vx = v.assemble()
    g = symmetrize(vx.T @ r.entries @ vx)
    return GramOperator(g, v.sample_count, v.output_dim, tols=tols)


def gram_increment(v: FeatureMap, r: PsdOperator, t: Effect,
                   tols: Tolerances = DEFAULT_TOLS) -> GramOperator:
    """Gram of the removed mass R^{1/2} T R^{1/2}; the per-step drop of the Gram."""
    return gram_operator(v, residual_increment(r, t, tols=tols), tols=tols)


def empirical_covariance(v: FeatureMap, tols: Tolerances = DEFAULT_TOLS) -> PsdOperator:
    """Feature covariance (1/m) sum_i V(s_i) V(s_i)^T on the feature space."""
    vx = v.assemble()
    return PsdOperator(symmetrize(vx @ vx.T / v.sample_count), tols=tols)


def rkhs_norm_sq(r: PsdOperator, u, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Squared norm <u, R^+ u> of the function with feature vector u.

    Returns math.inf when the component of u outside the numerical range of R
    (eigenvalues at or below cutoff_rel times the top one) exceeds
    ``range_tol`` relative to ||u||; directions R has removed cost infinitely.
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != r.dim:
        raise DimensionMismatch(f"vector length {u.shape[0]}, operator dim {r.dim}")
    u_norm = float(np.linalg.norm(u))
    if u_norm == 0.0:
        return 0.0
    vals, vecs = np.linalg.eigh(r.entries)
    lam_max = max(float(vals[-1]), 0.0)
    cutoff = tols.cutoff_rel * lam_max
    coeffs = vecs.T @ u
    in_range = (vals > cutoff) & (vals > 0.0)
    out_mass = float(np.linalg.norm(coeffs[~in_range]))
    if out_mass > tols.range_tol * u_norm:
        return math.inf
    return float(np.sum(coeffs[in_range] ** 2 / vals[in_range]))


def dominance_check(v: FeatureMap, q: ContractionWitness, r_ref: PsdOperator,
                    pairs=None, probes: int = 100, seed: int = 0,
                    tols: Tolerances = DEFAULT_TOLS) -> bool:
    """Sampled kernel-level check that the kernel of q stays below that of r_ref.

    For each diagonal sample pair (i, i) the quadratic forms of
    V(s_i)^T (R_ref - Q) V(s_i) are probed with seeded random unit vectors;
    any form below -psd_tol refutes dominance. Off-diagonal pairs in
    ``pairs`` are ignored, as dominance is a diagonal (quadratic form)
    statement.
    """
    if q.dim != r_ref.dim:
        raise DimensionMismatch(f"witness dim {q.dim}, reference dim {r_ref.dim}")
    if r_ref.dim != v.feature_dim:
        raise DimensionMismatch(f"reference dim {r_ref.dim}, feature dim {v.feature_dim}")
    if pairs is None:
        pairs = [(i, i) for i in range(v.sample_count)]
    indices = sorted({i for i, j in pairs if i == j})
    diff = r_ref.entries - q.op.entries
    rng = np.random.default_rng(seed)
    d = v.output_dim
    for i in indices:
        if not 0 <= i < v.sample_count:
            raise IndexOutOfRange(f"point index {i} outside 0..{v.sample_count - 1}")
        block = symmetrize(v.matrix(i).T @ diff @ v.matrix(i))
        h = rng.standard_normal((probes, d))
        norms = np.linalg.norm(h, axis=1)
        norms[norms == 0.0] = 1.0
        h /= norms[:, None]
        forms = np.einsum("pi,ij,pj->p", h, block, h)
        if float(forms.min()) < -tols.psd_tol:
            return False
    return True
