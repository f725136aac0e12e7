"""Semi-implicit first-order time stepping for the two-species system.

Per step both linear systems

    S_u u' = (1/tau) M u + f M 1 - N(u, v) + L(q_u),
    S_v v' = (1/tau) M v       + N(u, v) + L(q_v),

    S_u = (1/tau) M + d_u c A + f M,
    S_v = (1/tau) M + d_v c A + (f + kappa) M,

are solved with factorizations computed once and reused for the whole
run.  M is the mass matrix restricted to the solution domain, A the
(scaled) diffusion matrix, N the cubic reaction load evaluated at the
previous step (3-point Gauss, exact for the P1 integrand), and L the
source load assembled with the standard rule over the extended domain.
Rows of test functions supported in the collar carry no mass or reaction
term, so they are exactly the volume-constraint equations.

Both S matrices are symmetric positive definite: the diffusion part is
positive semidefinite with at most constants in its null space, and
constants carry mass.  Factorization uses a banded Cholesky when the
operator bandwidth is small (finite-horizon kernels), dense otherwise;
residuals are probe-checked at build time.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse

from .assembly import AssembledOperators
from .mesh import Mesh1D
from .quadrature import ASSEMBLY_RULE, REACTION_RULE, QuadratureRule

log = logging.getLogger(__name__)

_RESIDUAL_TOL = 1e-10


class FactorizationFailure(RuntimeError):
    """System matrix failed the SPD factorization or the residual probe
    (signals an assembly or configuration bug)."""


class NonFiniteState(RuntimeError):
    def __init__(self, step_index: int):
        super().__init__(f"non-finite state after step {step_index} (blow-up)")
        self.step_index = step_index


class MaxStepsExceeded(RuntimeError):
    def __init__(self, max_steps: int, last_criterion: float, state, trace):
        super().__init__(
            f"no steady state within {max_steps} steps; "
            f"last criterion {last_criterion:.3e}")
        self.last_criterion = last_criterion
        self.state = state
        self.trace = trace


@dataclass(frozen=True)
class PhysicalParams:
    d_u: float
    d_v: float
    f: float
    kappa: float
    scale_c: float = 1.0

    def __post_init__(self):
        if min(self.d_u, self.d_v, self.f, self.kappa) < 0.0:
            raise ValueError("rates must be nonnegative")


@dataclass
class StepperState:
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0
    n: int = 0


@dataclass
class Trace:
    """Per-step diagnostics: L2(omega) norms and the steady criterion."""
    steps: list = field(default_factory=list)
    times: list = field(default_factory=list)
    norm_u: list = field(default_factory=list)
    norm_v: list = field(default_factory=list)
    criterion: list = field(default_factory=list)

    def record(self, state, nu, nv, crit):
        self.steps.append(state.n)
        self.times.append(state.t)
        self.norm_u.append(nu)
        self.norm_v.append(nv)
        self.criterion.append(crit)


class _Factor:
    """Cholesky solve wrapper choosing banded or dense storage."""

    def __init__(self, S: np.ndarray):
        n = S.shape[0]
        rows, cols = np.nonzero(S)
        bw = int(np.max(np.abs(rows - cols))) if rows.size else 0
        try:
            if bw < n // 3:
                ab = np.zeros((bw + 1, n))
                for k in range(bw + 1):
                    ab[bw - k, k:] = np.diagonal(S, k)
                self._cb = scipy.linalg.cholesky_banded(ab, lower=False)
                self._solve = lambda b: scipy.linalg.cho_solve_banded(
                    (self._cb, False), b, check_finite=False)
            else:
                c, low = scipy.linalg.cho_factor(S, check_finite=False)
                self._solve = lambda b: scipy.linalg.cho_solve(
                    (c, low), b, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise FactorizationFailure(str(exc)) from exc
        # fixed probes keep the pipeline deterministic
        for b in (np.ones(n), np.cos(np.arange(n))):
            x = self._solve(b)
            resid = np.linalg.norm(S @ x - b) / np.linalg.norm(b)
            if not resid <= _RESIDUAL_TOL:
                raise FactorizationFailure(
                    f"factorization residual {resid:.3e} exceeds {_RESIDUAL_TOL}")
        self.matrix = S

    def __call__(self, b: np.ndarray) -> np.ndarray:
        return self._solve(b)


@dataclass
class FactoredSystems:
    solve_u: _Factor
    solve_v: _Factor
    tau: float


def build_systems(ops: AssembledOperators, params: PhysicalParams, tau: float,
                  diffusion: np.ndarray | None = None) -> FactoredSystems:
    """Assemble and factor both implicit matrices once.

    diffusion defaults to scale_c times the assembled integral operator;
    passing ops.laplacian instead gives the classical reference scheme.
    """
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    A = params.scale_c * ops.nonlocal_op if diffusion is None else diffusion
    M = ops.mass_omega
    S_u = (1.0 / tau + params.f) * M + params.d_u * A
    S_v = (1.0 / tau + params.f + params.kappa) * M + params.d_v * A
    return FactoredSystems(solve_u=_Factor(S_u), solve_v=_Factor(S_v), tau=tau)


class _LoadAssembler:
    """Per-element Gauss loads over a fixed region of the mesh."""

    def __init__(self, mesh: Mesh1D, rule: QuadratureRule, region: str):
        a, b = mesh.element_bounds
        mask = (mesh.interior_element_mask if region == "omega"
                else np.ones(mesh.n_elements, bool))
        self.dofs = mesh.elements[mask]
        a, b = a[mask], b[mask]
        mid = 0.5 * (a + b)[:, None]
        half = 0.5 * (b - a)[:, None]
        self.x = mid + half * rule.points          # (E, nq)
        self.w = half * rule.weights               # (E, nq)
        self.phi_r = 0.5 * (1.0 + rule.points)     # (nq,)
        self.phi_l = 1.0 - self.phi_r
        self.n_nodes = mesh.n_nodes

    def values(self, coeffs: np.ndarray) -> np.ndarray:
        """P1 field at the quadrature points."""
        return (coeffs[self.dofs[:, 0], None] * self.phi_l
                + coeffs[self.dofs[:, 1], None] * self.phi_r)

    def vector(self, fvals: np.ndarray) -> np.ndarray:
        """Load vector of int f phi_i from values at quadrature points."""
        wf = self.w * fvals
        return (np.bincount(self.dofs[:, 0], weights=wf @ self.phi_l,
                            minlength=self.n_nodes)
                + np.bincount(self.dofs[:, 1], weights=wf @ self.phi_r,
                              minlength=self.n_nodes))

    def integral(self, fvals: np.ndarray) -> float:
        return float(np.sum(self.w * fvals))


class Stepper:
    """Owns the factored systems plus the quadrature layouts of a run."""

    def __init__(self, mesh: Mesh1D, ops: AssembledOperators,
                 params: PhysicalParams, tau: float,
                 diffusion: np.ndarray | None = None):
        self.mesh = mesh
        self.ops = ops
        self.params = params
        self.tau = tau
        self.systems = build_systems(ops, params, tau, diffusion=diffusion)
        self._mass = scipy.sparse.csr_matrix(ops.mass_omega)
        self._feed = params.f * (self._mass @ np.ones(mesh.n_nodes))
        self._reaction = _LoadAssembler(mesh, REACTION_RULE, "omega")
        self._source = _LoadAssembler(mesh, ASSEMBLY_RULE, "omega_tilde")

    def l2_omega(self, coeffs: np.ndarray) -> float:
        return float(np.sqrt(max(coeffs @ (self._mass @ coeffs), 0.0)))

    def _reaction_load(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        vals = self._reaction.values(u) * self._reaction.values(v) ** 2
        return self._reaction.vector(vals)

    def _source_load(self, q, t: float) -> np.ndarray:
        if q is None:
            return 0.0
        return self._source.vector(q(self._source.x.ravel(), t).reshape(self._source.x.shape))

    def step(self, state: StepperState, q_u=None, q_v=None) -> StepperState:
        """Advance one step; the cubic term is explicit, sources are
        evaluated at the new time level."""
        t_new = state.t + self.tau
        react = self._reaction_load(state.u, state.v)
        rhs_u = (self._mass @ state.u) / self.tau + self._feed - react \
            + self._source_load(q_u, t_new)
        rhs_v = (self._mass @ state.v) / self.tau + react \
            + self._source_load(q_v, t_new)
        u_new = self.systems.solve_u(rhs_u)
        v_new = self.systems.solve_v(rhs_v)
        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
            raise NonFiniteState(state.n + 1)
        return StepperState(u=u_new, v=v_new, t=t_new, n=state.n + 1)

    def run_to_time(self, state: StepperState, T: float,
                    q_u=None, q_v=None, record=True):
        """March exactly T/tau steps (T/tau must be integral)."""
        n_steps = int(round(T / self.tau))
        if abs(n_steps * self.tau - T) > 1e-9 * max(T, 1.0):
            raise ValueError(f"tau={self.tau} does not divide T={T}")
        trace = Trace()
        energy_cap = self.l2_omega(state.u) ** 2 + (
            self.mesh.omega_bounds[1] - self.mesh.omega_bounds[0])
        homogeneous = q_u is None and q_v is None
        for _ in range(n_steps):
            state = self.step(state, q_u, q_v)
            if record:
                nu, nv = self.l2_omega(state.u), self.l2_omega(state.v)
                trace.record(state, nu, nv, float("nan"))
                if homogeneous and nu * nu > energy_cap * (1.0 + 1e-12):
                    log.warning("step %d: ||u||^2 = %.6e exceeds the homogeneous "
                                "energy diagnostic %.6e", state.n, nu * nu, energy_cap)
        return state, trace

    def run_to_steady(self, state: StepperState, tol: float = 1e-5,
                      max_steps: int = 500_000, q_u=None, q_v=None):
        """Step until the relative L2(omega) change of both species drops
        below tol; raises MaxStepsExceeded (with partial results) if the
        budget runs out."""
        if tol <= 0.0:
            raise ValueError("tol must be positive")
        trace = Trace()
        for _ in range(max_steps):
            prev = state
            state = self.step(state, q_u, q_v)
            crit = max(self._rel_change(prev.u, state.u),
                       self._rel_change(prev.v, state.v))
            trace.record(state, self.l2_omega(state.u), self.l2_omega(state.v), crit)
            if crit <= tol:
                return state, trace
        raise MaxStepsExceeded(max_steps, trace.criterion[-1], state, trace)

    def _rel_change(self, old: np.ndarray, new: np.ndarray) -> float:
        diff = self.l2_omega(new - old)
        ref = self.l2_omega(old)
        if ref == 0.0:
            return 0.0 if diff == 0.0 else float("inf")
        return diff / ref
