"""Independent Galerkin solver on a mixed trigonometric basis.

Cross-validates the finite-element path for Dirichlet problems on small
configurations.  The basis over an interval of half-width L consists of
the constant together with cosines and sines of the odd half-frequencies
(2n - 1) pi / (2L); none of these satisfies a classical boundary
condition, which is what the volume-constrained setting needs.

The raw set is not orthogonal: the constant has inner product
(-1)^(n-1) 2 sqrt(2) / ((2n-1) pi) with the n-th cosine (and the squares
of these sum to one, so the constant is asymptotically redundant).  The
cos/sin modes are kept pure and unit-normalized; the constant is
Gram-Schmidt orthogonalized against the cosines retained at a given
truncation, which leaves an orthonormal set spanning the same space and
makes the Galerkin mass matrix the identity.

The time march mirrors the finite-element scheme: backward differences
with the cubic term explicit, systems factored once.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .assembly import BcMode, KernelApplyPlan
from .quadrature import STRONG_FORM_RULE


@dataclass(frozen=True)
class SpectralBasis:
    L: float            # half-width of the solution interval
    N: int              # number of modes (odd: constant + cos/sin pairs)
    center: float = 0.0

    def __post_init__(self):
        if self.N < 1 or self.N % 2 == 0:
            raise ValueError("N must be odd: a constant plus cos/sin pairs")
        if self.L <= 0.0:
            raise ValueError("L must be positive")

    @property
    def interval(self) -> tuple[float, float]:
        return (self.center - self.L, self.center + self.L)


def _const_overlaps(n_pairs: int) -> np.ndarray:
    """Inner products of the unit constant with the unit cosines."""
    n = np.arange(1, n_pairs + 1)
    return (-1.0) ** (n - 1) * 2.0 * np.sqrt(2.0) / ((2 * n - 1) * np.pi)


def basis_eval(b: SpectralBasis, k: int, x) -> np.ndarray:
    """Value of normalized mode k at physical coordinates x.

    Mode 0 is the constant orthogonalized against the retained cosines;
    odd k are cosines, even k sines, of frequency (2n - 1) pi / (2L)
    with n = (k + 1) // 2, all unit-normalized.
    """
    if not 0 <= k < b.N:
        raise IndexError(f"mode index {k} out of range")
    s = np.asarray(x, dtype=float) - b.center
    if k > 0:
        n = (k + 1) // 2
        arg = (2 * n - 1) * np.pi * s / (2.0 * b.L)
        fn = np.cos if k % 2 == 1 else np.sin
        return fn(arg) / np.sqrt(b.L)
    alpha = _const_overlaps((b.N - 1) // 2)
    raw = np.full_like(s, 1.0 / np.sqrt(2.0 * b.L))
    for n, a in enumerate(alpha, start=1):
        raw = raw - a * basis_eval(b, 2 * n - 1, s + b.center)
    return raw / np.sqrt(1.0 - np.sum(alpha ** 2))


def basis_matrix(b: SpectralBasis, x) -> np.ndarray:
    """(len(x), N) matrix of mode values."""
    x = np.asarray(x, dtype=float)
    cols = [None] + [basis_eval(b, k, x) for k in range(1, b.N)]
    alpha = _const_overlaps((b.N - 1) // 2)
    raw = np.full_like(x, 1.0 / np.sqrt(2.0 * b.L), dtype=float)
    for n, a in enumerate(alpha, start=1):
        raw = raw - a * cols[2 * n - 1]
    cols[0] = raw / np.sqrt(1.0 - np.sum(alpha ** 2))
    return np.column_stack(cols)


class SpectralWorkspace:
    """Composite-Gauss grid over the interval with cached mode values;
    projections and reconstructions all run through it."""

    def __init__(self, b: SpectralBasis, panels: int | None = None):
        if panels is None:
            panels = max(8 * b.N, 64)
        lo, hi = b.interval
        edges = np.linspace(lo, hi, panels + 1)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        self.basis = b
        self.x = (mid + half * STRONG_FORM_RULE.points).ravel()
        self.w = (half * STRONG_FORM_RULE.weights).ravel()
        self.phi = basis_matrix(b, self.x)

    def project(self, fvals: np.ndarray) -> np.ndarray:
        """L2 projection onto the (orthonormal) modes."""
        return self.phi.T @ (self.w * fvals)

    def reconstruct(self, coeffs: np.ndarray, x=None) -> np.ndarray:
        if x is None:
            return self.phi @ coeffs
        return basis_matrix(self.basis, x) @ coeffs

    def gram(self) -> np.ndarray:
        return (self.phi * self.w[:, None]).T @ self.phi


def assemble_spectral(b: SpectralBasis, kernel, panels: int | None = None):
    """Stiffness of the volume-constrained operator on the basis,
    B = Gamma I - C with C the kernel-coupling Gram matrix, plus the
    workspace used for the nonlinear projections.

    Kernels with a slope kink at zero get a per-point split of the inner
    integral; smooth kernels use one tensor quadrature.
    """
    ws = SpectralWorkspace(b, panels)
    lo, hi = b.interval
    if getattr(kernel, "kink_at_zero", False):
        plan = KernelApplyPlan(ws.x, kernel, BcMode.DIRICHLET, (lo, hi),
                               h_quad=(hi - lo) / max(len(ws.w) // 8, 1))
        C = np.empty((b.N, b.N))
        inner_phi = basis_matrix(b, plan.y)
        for j in range(b.N):
            conv_j = np.add.reduceat(plan.w_gamma * inner_phi[:, j],
                                     plan.offsets[:-1])
            C[:, j] = ws.phi.T @ (ws.w * conv_j)
    else:
        ker = kernel.eval(ws.x[:, None] - ws.x[None, :])
        C = (ws.phi * ws.w[:, None]).T @ ker @ (ws.phi * ws.w[:, None])
    B = kernel.total_mass() * np.eye(b.N) - 0.5 * (C + C.T)
    return B, ws


@dataclass
class SpectralRun:
    coeffs_u: np.ndarray
    coeffs_v: np.ndarray
    t: float
    basis: SpectralBasis
    workspace: SpectralWorkspace


def solve_spectral(problem, b: SpectralBasis, tau: float, T: float,
                   panels: int | None = None) -> SpectralRun:
    """March the Galerkin system to time T.

    problem is either an MmsCase-like object (Dirichlet: supplies kernel,
    params, exact initial data, and source terms) or a tuple
    (u0, v0, kernel, params) of callables/values for a source-free run.
    """
    if hasattr(problem, "bc"):
        if problem.bc != BcMode.DIRICHLET:
            raise ValueError("the spectral oracle covers Dirichlet problems only")
        kernel, params = problem.kernel, problem.params
        u0, v0 = (lambda x: problem.u_exact(x, 0.0)), (lambda x: problem.v_exact(x, 0.0))
        from .mms import SourceEvaluator
        ev = SourceEvaluator(problem)
        q_u, q_v = ev.q_u, ev.q_v
    else:
        u0, v0, kernel, params = problem
        q_u = q_v = None

    B, ws = assemble_spectral(b, kernel, panels)
    n_steps = int(round(T / tau))
    if abs(n_steps * tau - T) > 1e-9 * max(T, 1.0):
        raise ValueError(f"tau={tau} does not divide T={T}")

    eye = np.eye(b.N)
    S_u = scipy.linalg.cho_factor((1.0 / tau + params.f) * eye + params.d_u * params.scale_c * B)
    S_v = scipy.linalg.cho_factor((1.0 / tau + params.f + params.kappa) * eye
                                  + params.d_v * params.scale_c * B)
    feed = params.f * ws.project(np.ones_like(ws.x))

    du = ws.project(np.asarray(u0(ws.x), dtype=float))
    dv = ws.project(np.asarray(v0(ws.x), dtype=float))
    t = 0.0
    for n in range(n_steps):
        t_new = t + tau
        uq = ws.phi @ du
        vq = ws.phi @ dv
        react = ws.project(uq * vq * vq)
        rhs_u = du / tau + feed - react
        rhs_v = dv / tau + react
        if q_u is not None:
            rhs_u = rhs_u + ws.project(q_u(ws.x, t_new))
            rhs_v = rhs_v + ws.project(q_v(ws.x, t_new))
        du = scipy.linalg.cho_solve(S_u, rhs_u)
        dv = scipy.linalg.cho_solve(S_v, rhs_v)
        t = t_new
    return SpectralRun(coeffs_u=du, coeffs_v=dv, t=t, basis=b, workspace=ws)


def l2_field_difference(fem_coeffs: np.ndarray, mesh, run: SpectralRun) -> float:
    """Absolute L2 distance over the solution interval between a P1 field
    and the reconstructed spectral field, on a quadrature grid refined
    against both discretizations."""
    x = run.workspace.x
    w = run.workspace.w
    idx = np.clip(np.searchsorted(mesh.nodes, x, side="right") - 1, 0,
                  mesh.n_elements - 1)
    a = mesh.nodes[mesh.elements[idx, 0]]
    b_ = mesh.nodes[mesh.elements[idx, 1]]
    t = (x - a) / (b_ - a)
    fem_vals = fem_coeffs[mesh.elements[idx, 0]] * (1 - t) \
        + fem_coeffs[mesh.elements[idx, 1]] * t
    spec_vals = run.workspace.phi @ run.coeffs_u
    return float(np.sqrt(np.sum(w * (fem_vals - spec_vals) ** 2)))
