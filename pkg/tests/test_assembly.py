import math
from dataclasses import dataclass

import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from nlgs.assembly import (BcMode, HorizonExceedsCollar, KernelApplyPlan,
                           assemble_gamma_mass, assemble_kernel_coupling,
                           assemble_laplacian, assemble_mass,
                           assemble_nonlocal, dump_matrix, eval_K_strong)
from nlgs.kernels import (DispersalExp, Gaussian, TruncatedGrowingExp,
                          partial_mass)
from nlgs.mesh import build_uniform
from nlgs.quadrature import ASSEMBLY_RULE, gauss_legendre


@dataclass(frozen=True)
class ConstKernel:
    """gamma identically one; separable coupling integrals by hand."""
    horizon: float = math.inf
    kink_at_zero: bool = False
    decay_scale: float = math.inf

    def eval(self, z):
        return np.ones_like(np.asarray(z, dtype=float))

    def total_mass(self):
        return math.inf

    def cdf(self, s):
        raise NotImplementedError


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 8])
def test_gauss_rules_exact_to_stated_order(n):
    rule = gauss_legendre(n)
    assert rule.weights.sum() == pytest.approx(2.0, rel=1e-14)
    assert np.all(rule.weights > 0)
    for k in range(rule.order + 1):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        got = np.sum(rule.weights * rule.points ** k)
        assert got == pytest.approx(exact, abs=1e-13)
    # and not beyond
    k = rule.order + 1
    got = np.sum(rule.weights * rule.points ** k)
    assert abs(got - 2.0 / (k + 1)) > 1e-10


def test_mass_single_element():
    m = build_uniform((0.0, 1.0), 0.0, 1.0)
    M = assemble_mass(m, "omega")
    assert np.allclose(M, [[1 / 3, 1 / 6], [1 / 6, 1 / 3]], atol=1e-15)


def test_mass_collar_rows_vanish_for_omega_region():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    M = assemble_mass(m, "omega")
    pure_collar = np.abs(m.nodes) > 8.0 + 0.5  # no support overlap with omega
    assert np.all(M[pure_collar] == 0.0)
    assert np.all(M[:, pure_collar] == 0.0)


def test_mass_row_sums_are_support_lengths():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    M = assemble_mass(m, "omega_tilde")
    sums = M.sum(axis=1)
    inner = slice(1, -1)
    assert np.allclose(sums[inner], m.h, atol=1e-14)
    assert sums[0] == pytest.approx(m.h / 2, abs=1e-14)
    assert M.sum() == pytest.approx(20.0, rel=1e-14)


def test_laplacian_examples():
    m1 = build_uniform((0.0, 1.0), 0.0, 1.0)
    assert np.allclose(assemble_laplacian(m1), [[1, -1], [-1, 1]], atol=1e-15)
    m = build_uniform((0.0, 1.0), 0.0, 0.25)
    A = assemble_laplacian(m)
    assert np.allclose(A @ np.ones(m.n_nodes), 0.0, atol=1e-13)
    assert np.allclose(A[2, 1:4], [-4.0, 8.0, -4.0], atol=1e-13)


def test_constant_kernel_coupling_is_separable():
    m = build_uniform((0.0, 1.0), 0.0, 1.0)
    G = assemble_kernel_coupling(m, ConstKernel(), BcMode.DIRICHLET)
    # G_ij = (int phi_i)(int phi_j) = 1/4
    assert np.allclose(G, 0.25, atol=1e-14)


def test_coupling_matches_adaptive_2d_quadrature():
    m = build_uniform((0.0, 1.0), 0.0, 0.5)
    g = Gaussian()
    G = assemble_kernel_coupling(m, g, BcMode.DIRICHLET)

    def phi(i, x):
        return np.interp(x, m.nodes, np.eye(3)[i])

    for i in range(3):
        for j in range(i, 3):
            ref, _ = dblquad(
                lambda y, x: math.exp(-(x - y) ** 2) * phi(j, y) * phi(i, x),
                0.0, 1.0, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12)
            assert G[i, j] == pytest.approx(ref, abs=1e-8)


def test_row_sum_identity_matches_gamma_mass():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    k = TruncatedGrowingExp(0.5, 2.0)
    G = assemble_kernel_coupling(m, k, BcMode.NEUMANN)
    D = assemble_gamma_mass(m, k, BcMode.NEUMANN)
    ones = np.ones(m.n_nodes)
    scale = np.abs(D).max()
    assert np.abs(G @ ones - D @ ones).max() <= 1e-10 * scale


def test_gamma_mass_dirichlet_is_scaled_full_mass():
    m = build_uniform((0.0, 1.0), 0.0, 0.05)
    g = Gaussian()
    D = assemble_gamma_mass(m, g, BcMode.DIRICHLET)
    M = assemble_mass(m, "omega")
    assert np.allclose(D, g.total_mass() * M, rtol=0.0, atol=1e-15)


def test_gamma_mass_neumann_boundary_values():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    k = DispersalExp(3.0, 2.0)
    lo, hi = m.extended_bounds
    # deep inside: full mass; at the boundary of the extended domain: half
    assert partial_mass(k, 0.0, (lo, hi)) == pytest.approx(1.0, rel=1e-12)
    assert partial_mass(k, hi, (lo, hi)) == pytest.approx(0.5, rel=1e-12)


def test_operator_invariants_dirichlet():
    m = build_uniform((0.0, 1.0), 0.0, 0.25)
    ops = assemble_nonlocal(m, Gaussian(), BcMode.DIRICHLET)
    for A in (ops.coupling, ops.gamma_mass, ops.nonlocal_op, ops.mass_omega,
              ops.laplacian):
        assert np.abs(A - A.T).max() <= 1e-12 * max(np.abs(A).max(), 1e-300)
    # positive definite under the zero-exterior constraint
    assert np.linalg.eigvalsh(ops.nonlocal_op).min() > 0.0
    assert np.array_equal(ops.nonlocal_op,
                          Gaussian().total_mass() * ops.mass_omega - ops.coupling)


def test_operator_invariants_neumann():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    ops = assemble_nonlocal(m, TruncatedGrowingExp(0.5, 2.0), BcMode.NEUMANN)
    A = ops.nonlocal_op
    assert np.abs(A - A.T).max() <= 1e-12 * np.abs(A).max()
    assert np.abs(A @ np.ones(m.n_nodes)).max() <= 1e-10 * np.abs(A).max()
    eigs = np.linalg.eigvalsh(A)
    assert eigs.min() >= -1e-12 * np.abs(A).max()


def test_horizon_larger_than_collar_rejected():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    with pytest.raises(HorizonExceedsCollar):
        assemble_kernel_coupling(m, DispersalExp(3.0, 5.0), BcMode.NEUMANN)
    with pytest.raises(HorizonExceedsCollar):
        assemble_kernel_coupling(m, Gaussian(), BcMode.NEUMANN)


def test_dirichlet_requires_collarless_mesh():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    with pytest.raises(ValueError):
        assemble_kernel_coupling(m, Gaussian(), BcMode.DIRICHLET)


def test_refinement_consistency_4pt_vs_8pt():
    cases = [
        (build_uniform((0.0, 1.0), 0.0, 0.05), Gaussian(), BcMode.DIRICHLET),
        (build_uniform((-8.0, 8.0), 2.0, 0.5), TruncatedGrowingExp(0.5, 2.0),
         BcMode.NEUMANN),
    ]
    for mesh, kernel, bc in cases:
        a4 = assemble_nonlocal(mesh, kernel, bc, gauss_legendre(4)).nonlocal_op
        a8 = assemble_nonlocal(mesh, kernel, bc, gauss_legendre(8)).nonlocal_op
        assert np.abs(a4 - a8).max() <= 1e-8 * np.abs(a8).max()


def _quadratic_form_brute(mesh, kernel, coeffs, n_gauss=12):
    """(1/2) double integral of gamma (u(y)-u(x))^2 with zero extension,
    by tensor Gauss over element pairs plus the closed-form exterior
    tail; independent of the assembly path."""
    rule = gauss_legendre(n_gauss)
    a, b = mesh.element_bounds
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    x = (mid + half * rule.points).ravel()
    w = (half * rule.weights).ravel()
    idx = np.clip(np.searchsorted(mesh.nodes, x, side="right") - 1, 0,
                  mesh.n_elements - 1)
    t = (x - mesh.nodes[mesh.elements[idx, 0]]) / (
        mesh.nodes[mesh.elements[idx, 1]] - mesh.nodes[mesh.elements[idx, 0]])
    u = coeffs[mesh.elements[idx, 0]] * (1 - t) + coeffs[mesh.elements[idx, 1]] * t
    gam = kernel.eval(x[:, None] - x[None, :])
    du = u[:, None] - u[None, :]
    inner = 0.5 * np.einsum("i,j,ij,ij->", w, w, gam, du * du)
    lo, hi = mesh.omega_bounds
    tail_density = kernel.total_mass() - np.array(
        [partial_mass(kernel, xi, (lo, hi)) for xi in x])
    tail = np.sum(w * u * u * tail_density)
    return inner + tail


def test_quadratic_form_matches_brute_force():
    m = build_uniform((0.0, 1.0), 0.0, 0.25)
    ops = assemble_nonlocal(m, Gaussian(), BcMode.DIRICHLET)
    x = m.nodes
    for coeffs in (np.sin(np.pi * x), x * (1.0 - x), np.cos(2.0 * x)):
        got = coeffs @ (ops.nonlocal_op @ coeffs)
        ref = _quadratic_form_brute(m, Gaussian(), coeffs)
        assert got == pytest.approx(ref, abs=1e-8)


def test_strong_weak_consistency():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    kernel = TruncatedGrowingExp(0.5, 2.0)
    ops = assemble_nonlocal(m, kernel, BcMode.NEUMANN)
    w = np.sin(np.pi * m.nodes / 10.0)

    def w_h(y):
        return np.interp(y, m.nodes, w)

    lo, hi = m.extended_bounds
    a, b = m.element_bounds
    rule = ASSEMBLY_RULE
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    xq = (mid + half * rule.points).ravel()
    wq = (half * rule.weights).ravel()
    plan = KernelApplyPlan(xq, kernel, BcMode.NEUMANN, (lo, hi),
                           h_quad=m.h / 2, breakpoints=m.nodes)
    Kw = plan.apply(w_h)
    load = np.zeros(m.n_nodes)
    t = (xq - np.repeat(a, rule.points.size)) / np.repeat(b - a, rule.points.size)
    eL = np.repeat(m.elements[:, 0], rule.points.size)
    eR = np.repeat(m.elements[:, 1], rule.points.size)
    np.add.at(load, eL, wq * Kw * (1 - t))
    np.add.at(load, eR, wq * Kw * t)
    got = ops.nonlocal_op @ w
    assert np.abs(got + load).max() <= 1e-6


def test_eval_K_strong_constant_neumann_zero():
    m = build_uniform((-8.0, 8.0), 2.0, 0.5)
    k = TruncatedGrowingExp(0.5, 2.0)
    for x in (-9.7, -3.0, 0.0, 4.5, 10.0):
        v = eval_K_strong(lambda y: np.ones_like(y), x, k, BcMode.NEUMANN,
                          m.extended_bounds)
        assert abs(v) <= 1e-12 * k.total_mass()


def test_eval_K_strong_linear_dirichlet_against_quadrature():
    g = Gaussian()
    ref_conv, _ = quad(lambda y: math.exp(-(0.5 - y) ** 2) * y, 0.0, 1.0,
                       epsabs=1e-13)
    ref = ref_conv - 0.5 * g.total_mass()
    got = eval_K_strong(lambda y: y, 0.5, g, BcMode.DIRICHLET, (0.0, 1.0))
    assert got == pytest.approx(ref, abs=1e-10)


def test_eval_K_strong_local_limit_quadratic():
    k = DispersalExp(50.0, 5.0)
    from nlgs.kernels import laplacian_scale
    C = laplacian_scale(k)
    val = eval_K_strong(lambda y: y ** 2, 7.0, k, BcMode.NEUMANN, (-40.0, 40.0))
    assert C * val == pytest.approx(2.0, abs=1e-2)


def test_matrix_dump_roundtrip(tmp_path):
    m = build_uniform((0.0, 1.0), 0.0, 0.5)
    M = assemble_mass(m, "omega")
    path = tmp_path / "mass.txt"
    dump_matrix(M, path)
    lines = path.read_text().splitlines()
    rows, cols = map(int, lines[0].split())
    assert (rows, cols) == M.shape
    back = np.array([[float(v) for v in line.split()] for line in lines[1:]])
    assert np.array_equal(back, M)
