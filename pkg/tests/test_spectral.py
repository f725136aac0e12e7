import math
from dataclasses import dataclass

import numpy as np
import pytest

from nlgs.kernels import Gaussian
from nlgs.mms import MMS_CASES
from nlgs.spectral import (SpectralBasis, SpectralWorkspace, assemble_spectral,
                           basis_eval, basis_matrix, solve_spectral)
from nlgs.stepping import PhysicalParams


@dataclass(frozen=True)
class ZeroKernel:
    horizon: float = math.inf
    kink_at_zero: bool = False
    decay_scale: float = math.inf

    def eval(self, z):
        return np.zeros_like(np.asarray(z, dtype=float))

    def total_mass(self):
        return 0.0


def test_basis_requires_odd_mode_count():
    with pytest.raises(ValueError):
        SpectralBasis(L=1.0, N=10)


def test_cosine_modes_vanish_at_interval_ends():
    b = SpectralBasis(L=1.0, N=7)
    for k in (1, 3, 5):
        assert abs(basis_eval(b, k, 1.0)) <= 1e-14
        assert abs(basis_eval(b, k, -1.0)) <= 1e-14


def test_gram_matrix_is_identity():
    ws = SpectralWorkspace(SpectralBasis(L=1.0, N=7))
    assert np.abs(ws.gram() - np.eye(7)).max() <= 1e-12


def test_gram_matrix_identity_off_center_interval():
    ws = SpectralWorkspace(SpectralBasis(L=0.5, N=11, center=0.5))
    assert np.abs(ws.gram() - np.eye(11)).max() <= 1e-12


def test_basis_matrix_consistent_with_basis_eval():
    b = SpectralBasis(L=0.5, N=9, center=0.5)
    x = np.linspace(0.0, 1.0, 13)
    mat = basis_matrix(b, x)
    for k in range(b.N):
        assert np.allclose(mat[:, k], basis_eval(b, k, x), atol=1e-14)


def test_projection_error_decays_with_mode_count():
    case = MMS_CASES["dirichlet1"]
    errs = []
    for N in (11, 21, 41):
        ws = SpectralWorkspace(SpectralBasis(L=0.5, N=N, center=0.5))
        f = case.u_exact(ws.x, 0.0)
        c = ws.project(f)
        errs.append(float(np.sqrt(np.sum(ws.w * (f - ws.phi @ c) ** 2))))
    assert errs[0] > errs[1] > errs[2]


def test_projection_satisfies_parseval():
    ws = SpectralWorkspace(SpectralBasis(L=0.5, N=21, center=0.5))
    f = np.exp(-ws.x) * np.sin(3.0 * ws.x)
    c = ws.project(f)
    total = np.sum(ws.w * f * f)
    resid = np.sum(ws.w * (f - ws.phi @ c) ** 2)
    assert total == pytest.approx(float(c @ c) + resid, rel=1e-12)


def test_stiffness_symmetric_positive_definite():
    B, _ = assemble_spectral(SpectralBasis(L=0.5, N=15, center=0.5), Gaussian())
    assert np.abs(B - B.T).max() <= 1e-10
    assert np.linalg.eigvalsh(B).min() > 0.0


def test_zero_kernel_gives_zero_stiffness():
    B, _ = assemble_spectral(SpectralBasis(L=1.0, N=7), ZeroKernel())
    assert np.abs(B).max() <= 1e-14


def test_zero_data_stays_zero():
    params = PhysicalParams(d_u=0.05, d_v=0.01, f=0.0, kappa=2.0)
    problem = (lambda x: np.zeros_like(x), lambda x: np.zeros_like(x),
               Gaussian(), params)
    run = solve_spectral(problem, SpectralBasis(L=0.5, N=11, center=0.5),
                         tau=0.1, T=1.0)
    assert np.abs(run.coeffs_u).max() <= 1e-14
    assert np.abs(run.coeffs_v).max() <= 1e-14


def test_neumann_case_rejected():
    with pytest.raises(ValueError):
        solve_spectral(MMS_CASES["neumann1"],
                       SpectralBasis(L=10.0, N=11), tau=0.1, T=1.0)
