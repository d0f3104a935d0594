"""Seeded property suites covering the package's numerical guarantees.

Each suite returns (max_error, tolerance); a suite passes when the error is
at or below its tolerance. The CLI `check` subcommand prints one line per
suite. All randomness is drawn from fixed seeds so runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics, energy, kernels, operators, ridge
from .config import DEFAULT_TOLS
from .dynamics import (
    ConstantProjection,
    CovarianceSpectral,
    ExplicitList,
    Greedy,
    StoppingRule,
    run_trajectory,
    telescoping_error,
)
from .kernels import (
    ContractionWitness,
    FeatureMap,
    dominance_check,
    empirical_covariance,
    gram_increment,
    gram_operator,
    rkhs_norm_sq,
)
from .operators import (
    PsdOperator,
    SubspaceSpec,
    loewner_leq,
    orthogonal_projection,
    psd_sqrt,
    pseudo_inverse,
    top_eigenpair,
    validate_effect,
)
from .ridge import Labels, Predictor, RidgeConfig, krr_fit, krr_path, krr_predict


# ---------------------------------------------------------------------------
# seeded generators, shared with the test suite


def random_psd(rng, dim, scale=1.0, rank=None):
    """Random PSD matrix, optionally rank-deficient."""
    r = dim if rank is None else rank
    x = rng.standard_normal((r, dim))
    return PsdOperator(operators.symmetrize(scale * (x.T @ x) / max(r, 1)))


def random_orthogonal(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_contraction(rng, dim, top=1.0):
    """Random effect with eigenvalues uniform in [0, top]."""
    q = random_orthogonal(rng, dim)
    w = rng.uniform(0.0, top, dim)
    return validate_effect(operators.symmetrize((q * w) @ q.T))


def random_subspace(rng, dim, rank):
    return SubspaceSpec(dim, rng.standard_normal((rank, dim)))


def contraction_in(rng, subspace, top=1.0):
    """Random effect supported inside the given subspace."""
    b = subspace.basis
    r = subspace.rank
    if r == 0:
        return validate_effect(np.zeros((subspace.ambient_dim, subspace.ambient_dim)))
    inner = random_contraction(rng, r, top=top).entries
    return validate_effect(operators.symmetrize(b @ inner @ b.T))


def random_feature_map(rng, dim, out_dim, m):
    return FeatureMap(rng.standard_normal((m, dim, out_dim)) / math.sqrt(dim))


def mixed_schedule(rng, dim, kind):
    """One of the four schedule families, round-robin by ``kind`` index."""
    kind = kind % 4
    if kind == 0:
        rank = int(rng.integers(1, dim))
        scale = float(rng.uniform(0.3, 1.0))
        return ConstantProjection(random_subspace(rng, dim, rank), scale)
    if kind == 1:
        sigma = random_psd(rng, dim)
        taus = sorted(rng.uniform(0.0, 1.5, int(rng.integers(1, 4))), reverse=True)
        return CovarianceSpectral(sigma, taus)
    if kind == 2:
        return Greedy(random_psd(rng, dim))
    return ExplicitList([random_contraction(rng, dim, top=0.9) for _ in range(40)])


def seeded_trajectories(seed=20260810, count=12, max_dim=12, max_steps=25):
    """Trajectories across all schedule kinds, with a feature map each."""
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        dim = int(rng.integers(2, max_dim + 1))
        schedule = mixed_schedule(rng, dim, k)
        traj = run_trajectory(PsdOperator.identity(dim), schedule,
                              StoppingRule(max_steps, 1e-12))
        v = random_feature_map(rng, dim, 1 + k % 2, int(rng.integers(2, 7)))
        out.append((traj, v))
    return out


def exhausting_setup(rng, dim, rank, scale=0.5, m=8, d=1, max_steps=400):
    """Converged nuisance-removal run plus feature map and projections."""
    u = random_subspace(rng, dim, rank)
    traj = run_trajectory(PsdOperator.identity(dim), ConstantProjection(u, scale),
                          StoppingRule(max_steps, 1e-13))
    v = random_feature_map(rng, dim, d, m)
    p_perp = PsdOperator(np.eye(dim) - orthogonal_projection(u).entries)
    return u, traj, v, p_perp


# ---------------------------------------------------------------------------
# suites


def check_sqrt_reconstruction():
    rng = np.random.default_rng(1)
    err = 0.0
    for dim in (2, 5, 9, 17):
        for _ in range(5):
            a = random_psd(rng, dim, scale=float(rng.uniform(0.1, 10.0)))
            s = psd_sqrt(a).entries
            err = max(err, float(np.linalg.norm(s @ s - a.entries))
                      / max(float(np.linalg.norm(a.entries)), 1e-300))
    return err, DEFAULT_TOLS.recon_tol


def check_loewner_order():
    rng = np.random.default_rng(2)
    violations = 0.0
    for _ in range(10):
        dim = int(rng.integers(2, 9))
        a = random_psd(rng, dim)
        if not loewner_leq(a, a, 0.0):
            violations += 1.0
        b = PsdOperator(a.entries + np.eye(dim))
        if not loewner_leq(a, b, 0.0) or loewner_leq(b, a, 0.0):
            violations += 1.0
        # dyadic diagonals make the subtraction exact, so tol 0 is legitimate
        d1 = np.diag(rng.integers(0, 64, dim) / 32.0)
        d2 = d1 + np.diag(rng.integers(0, 64, dim) / 32.0)
        d3 = d2 + np.diag(rng.integers(0, 64, dim) / 32.0)
        p1, p2, p3 = PsdOperator(d1), PsdOperator(d2), PsdOperator(d3)
        if loewner_leq(p1, p2, 0.0) and loewner_leq(p2, p3, 0.0):
            if not loewner_leq(p1, p3, 0.0):
                violations += 1.0
        # antisymmetry: mutual domination at tol 0 forces equality
        p1_copy = PsdOperator(d1.copy())
        if loewner_leq(p1, p1_copy, 0.0) and loewner_leq(p1_copy, p1, 0.0):
            if float(np.linalg.norm(p1.entries - p1_copy.entries)) > DEFAULT_TOLS.recon_tol:
                violations += 1.0
    return violations, 0.0


def check_projection_complement():
    rng = np.random.default_rng(3)
    err = 0.0
    for _ in range(8):
        dim = int(rng.integers(2, 12))
        u = random_subspace(rng, dim, int(rng.integers(0, dim + 1)))
        p = orthogonal_projection(u).entries
        p_c = orthogonal_projection(u.complement()).entries
        err = max(err, float(np.abs(p + p_c - np.eye(dim)).max()))
    return err, DEFAULT_TOLS.recon_tol


def check_top_eigenpair_rayleigh():
    rng = np.random.default_rng(4)
    err = 0.0
    for dim in (2, 4, 7):
        a = random_psd(rng, dim)
        lam, w = top_eigenpair(a)
        x = rng.standard_normal((10_000, dim))
        x /= np.linalg.norm(x, axis=1)[:, None]
        sampled = float(np.einsum("pi,ij,pj->p", x, a.entries, x).max())
        achieved = max(sampled, float(w @ a.entries @ w))
        err = max(err, sampled - lam, abs(achieved - lam))
    return err, 1e-8


def check_trajectory_monotonicity():
    rng = np.random.default_rng(5)
    err = 0.0
    for traj, _ in seeded_trajectories():
        for n in range(len(traj)):
            diff = traj.operators[n].entries - traj.operators[n + 1].entries
            err = max(err, -float(np.linalg.eigvalsh(diff)[0]))
        for _ in range(100):
            x = rng.standard_normal(traj.initial.dim)
            forms = [float(x @ r.entries @ x) for r in traj.operators]
            for a, b in zip(forms, forms[1:]):
                err = max(err, (b - a) / (x @ x))
    return err, 1e-10


def check_residual_identity():
    rng = np.random.default_rng(6)
    err = 0.0
    for _ in range(12):
        dim = int(rng.integers(2, 21))
        r = random_psd(rng, dim, scale=float(rng.uniform(0.2, 5.0)))
        t = random_contraction(rng, dim)
        back = dynamics.shorting_step(r, t).entries + dynamics.residual_increment(r, t).entries
        err = max(err, float(np.linalg.norm(back - r.entries))
                  / max(float(np.linalg.norm(r.entries)), 1e-300))
    return err, 1e-11


def check_operator_telescoping():
    err = 0.0
    for traj, _ in seeded_trajectories(max_dim=12, max_steps=40):
        err = max(err, telescoping_error(traj))
    rng = np.random.default_rng(7)
    u = random_subspace(rng, 50, 20)
    long = run_trajectory(PsdOperator.identity(50), ConstantProjection(u, 0.2),
                          StoppingRule(100, 1e-300))
    err = max(err, telescoping_error(long))
    return err, 1e-9


def check_projection_closed_form():
    rng = np.random.default_rng(8)
    err = 0.0
    for c in (0.1, 0.5, 0.9):
        for rotated in (False, True):
            dim = 4
            if rotated:
                u = random_subspace(rng, dim, 2)
            else:
                u = SubspaceSpec(dim, np.eye(dim)[:2])
            p_u = orthogonal_projection(u).entries
            p_perp = np.eye(dim) - p_u
            traj = run_trajectory(PsdOperator.identity(dim), ConstantProjection(u, c),
                                  StoppingRule(60, 1e-300))
            for n, r in enumerate(traj.operators):
                expected = (1.0 - c) ** n * p_u + p_perp
                err = max(err, float(np.linalg.norm(r.entries - expected)))
    return err, 1e-10


def check_idempotent_fixed_point():
    rng = np.random.default_rng(9)
    err = 0.0
    for _ in range(6):
        dim = int(rng.integers(3, 10))
        u = random_subspace(rng, dim, int(rng.integers(1, dim)))
        r = PsdOperator(np.eye(dim) - orthogonal_projection(u).entries)
        t = contraction_in(rng, u)
        stepped = dynamics.shorting_step(r, t)
        err = max(err, float(np.linalg.norm(stepped.entries - r.entries)))
    return err, DEFAULT_TOLS.recon_tol


def check_gram_positivity():
    err = 0.0
    for traj, v in seeded_trajectories():
        for r in traj.operators:
            g = gram_operator(v, r)
            w = np.linalg.eigvalsh(g.matrix)
            err = max(err, -float(w[0]) / (1.0 + max(float(w[-1]), 0.0)))
    return err, 1e-10


def check_gram_monotonicity():
    err = 0.0
    for traj, v in seeded_trajectories():
        grams = [gram_operator(v, r).matrix for r in traj.operators]
        for a, b in zip(grams, grams[1:]):
            err = max(err, -float(np.linalg.eigvalsh(a - b)[0]))
    return err, 1e-10


def check_gram_telescoping():
    err = 0.0
    for traj, v in seeded_trajectories():
        first = gram_operator(v, traj.operators[0]).matrix
        last = gram_operator(v, traj.operators[-1]).matrix
        total = np.zeros_like(first)
        for n in range(len(traj)):
            total = total + gram_increment(v, traj.operators[n], traj.effects_used[n]).matrix
        err = max(err, float(np.linalg.norm((first - last) - total)))
    return err, 1e-9


def check_rkhs_norm_monotonicity():
    rng = np.random.default_rng(10)
    err = 0.0
    for _ in range(5):
        dim = int(rng.integers(3, 9))
        _, traj, _, _ = exhausting_setup(rng, dim, int(rng.integers(1, dim)),
                                         scale=float(rng.uniform(0.3, 0.8)))
        for n in range(len(traj)):
            vvec = rng.standard_normal(dim)
            u_vec = traj.operators[n + 1].entries @ vvec
            before = rkhs_norm_sq(traj.operators[n], u_vec)
            after = rkhs_norm_sq(traj.operators[n + 1], u_vec)
            if math.isinf(after):
                continue
            if math.isinf(before):
                err = max(err, 1.0)
                continue
            err = max(err, before - after)
    return err, 1e-8


def check_limit_kernel_form():
    rng = np.random.default_rng(11)
    err = 0.0
    for _ in range(4):
        dim = int(rng.integers(3, 9))
        _, traj, v, p_perp = exhausting_setup(rng, dim, int(rng.integers(1, dim)))
        g_final = gram_operator(v, traj.final).matrix
        g_limit = gram_operator(v, p_perp).matrix
        err = max(err, float(np.linalg.norm(g_final - g_limit)))
    return err, 1e-8


def check_kernel_dominance():
    rng = np.random.default_rng(12)
    violations = 0.0
    for _ in range(6):
        dim = int(rng.integers(3, 9))
        u, traj, v, p_perp = exhausting_setup(rng, dim, int(rng.integers(1, dim - 1)))
        witness = ContractionWitness(contraction_in(rng, u.complement()))
        if not dominance_check(v, witness, traj.final):
            violations += 1.0
        # a witness leaking onto U must break the operator comparison
        g = u.basis[:, 0]
        leaky = validate_effect(operators.symmetrize(
            0.5 * witness.op.entries + 0.4 * np.outer(g, g)))
        if loewner_leq(leaky, p_perp):
            violations += 1.0
    return violations, 0.0


def check_coefficient_path_identity():
    rng = np.random.default_rng(13)
    err = 0.0
    for k, (traj, v) in enumerate(seeded_trajectories(seed=14, count=6)):
        y = Labels(rng.standard_normal((v.sample_count, v.output_dim)))
        cfg = RidgeConfig((0.01, 0.1, 1.0)[k % 3])
        path = krr_path(traj, v, y, cfg)
        scale = 1.0 + float(np.linalg.norm(y.stacked))
        for n in range(len(path.path_residuals)):
            defect = float(np.linalg.norm(
                (path.coefficients[n + 1] - path.coefficients[n]) - path.path_residuals[n]))
            err = max(err, defect / scale)
    return err, 1e-8


def check_limit_predictor():
    rng = np.random.default_rng(15)
    err = 0.0
    for _ in range(4):
        dim = int(rng.integers(3, 8))
        _, traj, v, p_perp = exhausting_setup(rng, dim, int(rng.integers(1, dim)))
        y = Labels(rng.standard_normal((v.sample_count, v.output_dim)))
        cfg = RidgeConfig(0.1)
        path = krr_path(traj, v, y, cfg)
        direct = krr_fit(gram_operator(v, p_perp), y, cfg)
        p_lim = path.predictor(len(traj), v)
        p_dir = Predictor(v, p_perp, direct)
        for i in range(v.sample_count):
            diff = krr_predict(p_lim, v.matrix(i)) - krr_predict(p_dir, v.matrix(i))
            err = max(err, float(np.abs(diff).max()))
    return err, 1e-7


def check_alignment_decay():
    rng = np.random.default_rng(16)
    err = 0.0
    for _ in range(4):
        dim = int(rng.integers(3, 8))
        u, traj, v, _ = exhausting_setup(rng, dim, int(rng.integers(1, dim)))
        y = Labels(rng.standard_normal((v.sample_count, v.output_dim)))
        path = krr_path(traj, v, y, RidgeConfig(0.1))
        for k in range(u.rank):
            align = ridge.nuisance_alignment(path, v, u.basis[:, k], traj.initial)
            err = max(err, abs(align[-1]))
    return err, 1e-8


def check_ridge_regularity():
    rng = np.random.default_rng(17)
    err = 0.0
    for lam in (1e-8, 1e-4, 1e-2, 1.0):
        v = random_feature_map(rng, 6, 1, 8)
        g = gram_operator(v, random_psd(rng, 6))
        y = Labels(rng.standard_normal((8, 1)))
        c = krr_fit(g, y, RidgeConfig(lam))
        resid = np.linalg.norm((g.matrix + lam * np.eye(8)) @ c - y.stacked)
        err = max(err, float(resid) / float(np.linalg.norm(y.stacked)))
    return err, DEFAULT_TOLS.solve_tol


def check_energy_drop_consistency():
    rng = np.random.default_rng(18)
    err = 0.0
    for _ in range(8):
        dim = int(rng.integers(2, 21))
        b = random_psd(rng, dim)
        r = random_psd(rng, dim)
        t = random_contraction(rng, dim)
        drop = energy.energy_drop(b, r, t)
        diff = energy.task_energy(b, r) - energy.task_energy(b, dynamics.shorting_step(r, t))
        err = max(err, abs(drop - diff))
    return err, 1e-9


def check_greedy_optimality():
    rng = np.random.default_rng(19)
    err = 0.0
    for _ in range(5):
        dim = int(rng.integers(3, 9))
        b = random_psd(rng, dim)
        r = random_psd(rng, dim)
        effect, drop = energy.greedy_effect(b, r)
        conj = energy.conjugate_task(b, r).entries
        err = max(err, abs(drop - float(np.linalg.eigvalsh(conj)[-1])))
        err = max(err, abs(energy.energy_drop(b, r, effect) - drop))
        x = rng.standard_normal((1000, dim))
        x /= np.linalg.norm(x, axis=1)[:, None]
        sampled = float(np.einsum("pi,ij,pj->p", x, conj, x).max())
        err = max(err, sampled - drop)
    return err, 1e-9


def check_greedy_eigenvector_support():
    rng = np.random.default_rng(20)
    err = 0.0
    for _ in range(5):
        dim = int(rng.integers(4, 10))
        rank = int(rng.integers(1, dim))
        b = random_psd(rng, dim)
        r = random_psd(rng, dim, rank=rank)
        effect, drop = energy.greedy_effect(b, r)
        if drop <= 1e-12:
            continue
        vals, vecs = np.linalg.eigh(r.entries)
        kernel = vecs[:, vals <= 1e-12 * max(float(vals[-1]), 1.0)]
        _, w = top_eigenpair(energy.conjugate_task(b, r))
        if kernel.shape[1]:
            err = max(err, float(np.linalg.norm(kernel.T @ w)))
    return err, 1e-8


def check_energy_ledger_monotone():
    rng = np.random.default_rng(21)
    err = 0.0
    for traj, _ in seeded_trajectories(seed=22, count=8):
        b = random_psd(rng, traj.initial.dim)
        ledger = energy.energy_ledger(traj, b)
        scale = 1.0 + abs(ledger.energies[0])
        for a, c in zip(ledger.energies, ledger.energies[1:]):
            err = max(err, (c - a) / scale)
        for n, drop in enumerate(ledger.drops):
            err = max(err, abs(drop - (ledger.energies[n] - ledger.energies[n + 1])) / scale)
    return err, 1e-9


def check_pseudo_inverse_penrose():
    rng = np.random.default_rng(23)
    err = 0.0
    for _ in range(6):
        dim = int(rng.integers(2, 9))
        a = random_psd(rng, dim, rank=int(rng.integers(1, dim + 1)))
        p = pseudo_inverse(a)
        err = max(err, float(np.linalg.norm(a.entries @ p.entries @ a.entries - a.entries)))
        err = max(err, float(np.linalg.norm(p.entries @ a.entries @ p.entries - p.entries)))
    return err, 1e-9


CHECKS = [
    ("sqrt-reconstruction", check_sqrt_reconstruction),
    ("loewner-order", check_loewner_order),
    ("projection-complement", check_projection_complement),
    ("pseudo-inverse-penrose", check_pseudo_inverse_penrose),
    ("top-eigenpair-rayleigh", check_top_eigenpair_rayleigh),
    ("trajectory-monotonicity", check_trajectory_monotonicity),
    ("residual-identity", check_residual_identity),
    ("operator-telescoping", check_operator_telescoping),
    ("projection-closed-form", check_projection_closed_form),
    ("idempotent-fixed-point", check_idempotent_fixed_point),
    ("gram-positivity", check_gram_positivity),
    ("gram-monotonicity", check_gram_monotonicity),
    ("gram-telescoping", check_gram_telescoping),
    ("rkhs-norm-monotonicity", check_rkhs_norm_monotonicity),
    ("limit-kernel-form", check_limit_kernel_form),
    ("kernel-dominance", check_kernel_dominance),
    ("coefficient-path-identity", check_coefficient_path_identity),
    ("limit-predictor", check_limit_predictor),
    ("alignment-decay", check_alignment_decay),
    ("ridge-regularity", check_ridge_regularity),
    ("energy-drop-consistency", check_energy_drop_consistency),
    ("greedy-optimality", check_greedy_optimality),
    ("greedy-eigenvector-support", check_greedy_eigenvector_support),
    ("energy-ledger-monotone", check_energy_ledger_monotone),
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    passed: bool


def run_suites(name_filter: str | None = None) -> list[CheckResult]:
    """Run all suites whose name contains ``name_filter`` (all when None)."""
    results = []
    for name, fn in CHECKS:
        if name_filter and name_filter not in name:
            continue
        err, tol = fn()
        results.append(CheckResult(name, float(err), float(tol), err <= tol))
    return results
