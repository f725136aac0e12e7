"""P1 finite-element assembly of the integral diffusion operator.

The operator K u(x) = integral over the interaction domain of
(u(y) - u(x)) gamma(x - y) dy splits, in weak form, into

    A = D - G,
    D_ij = int Gamma(x) phi_i(x) phi_j(x) dx,   Gamma(x) = mass of the
                                                kernel reachable from x,
    G_ij = int int gamma(x - y) phi_j(y) phi_i(x) dy dx,

so that u^T A u = (1/2) int int gamma (u(y) - u(x))^2, a positive
semidefinite quadratic form.  Under the Dirichlet volume constraint the
unknowns vanish outside omega: all coupling integrals restrict to omega
while Gamma is the full-line mass (the zero extension is exact, no
truncation error).  Under the Neumann constraint everything is assembled
over the extended domain and Gamma comes from the closed-form partial
mass.

G is computed with an outer Gauss loop over elements and, per outer
point, an inner composite Gauss integral over the horizon-clipped
interaction interval, decomposed at element boundaries and split at the
kernel kink y = x.  Matrices are stored dense; the largest problems run
here stay below a few thousand nodes.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .kernels import partial_mass_at
from .mesh import Mesh1D
from .quadrature import ASSEMBLY_RULE, STRONG_FORM_RULE, QuadratureRule


class BcMode(Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


class HorizonExceedsCollar(ValueError):
    """Neumann assembly with a kernel reaching past the collar."""


@dataclass(frozen=True)
class AssembledOperators:
    """Matrices of the semi-discrete system, indexed by all mesh nodes."""

    mass_omega: np.ndarray        # mass restricted to omega
    coupling: np.ndarray | None   # G above
    gamma_mass: np.ndarray | None # D above
    nonlocal_op: np.ndarray | None  # D - G
    laplacian: np.ndarray         # P1 stiffness over omega, natural bc


def _check_bc(mesh: Mesh1D, kernel, bc: BcMode) -> tuple[float, float]:
    """Integration bounds for the coupling integrals."""
    if bc == BcMode.DIRICHLET:
        if mesh.collar_width != 0.0:
            raise ValueError("Dirichlet problems use collar-free meshes; "
                             "the zero extension replaces the collar")
        return mesh.omega_bounds
    if kernel.horizon > mesh.collar_width:
        raise HorizonExceedsCollar(
            f"kernel horizon {kernel.horizon} exceeds collar width "
            f"{mesh.collar_width}; constraint rows would see past the mesh")
    return mesh.extended_bounds


def _element_gauss(mesh: Mesh1D, rule: QuadratureRule, mask=None):
    """Gauss points/weights per element, shape (n_selected, n_q)."""
    a, b = mesh.element_bounds
    if mask is not None:
        a, b = a[mask], b[mask]
    mid = 0.5 * (a + b)[:, None]
    half = 0.5 * (b - a)[:, None]
    return mid + half * rule.points, half * rule.weights


def _outer_points(mesh: Mesh1D, rule: QuadratureRule, cap: float):
    """Flat outer quadrature arrays (element index, point, weight), with
    elements wider than the kernel decay cap split into sub-panels so the
    coupling and Gamma-weighted matrices sample identically."""
    a, b = mesh.element_bounds
    elem_idx, xs, ws = [], [], []
    for e in range(mesh.n_elements):
        width = b[e] - a[e]
        parts = 1 if not np.isfinite(cap) else max(1, int(math.ceil(width / cap)))
        x, w = _panel_points(np.linspace(a[e], b[e], parts + 1), rule)
        elem_idx.append(np.full(x.size, e))
        xs.append(x)
        ws.append(w)
    return np.concatenate(elem_idx), np.concatenate(xs), np.concatenate(ws)


def _panel_points(edges: np.ndarray, rule: QuadratureRule):
    """Map a rule onto consecutive panels; returns flat points/weights."""
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * rule.points).ravel(), (half * rule.weights).ravel()


def assemble_mass(mesh: Mesh1D, region: str = "omega") -> np.ndarray:
    """Exact tridiagonal P1 mass matrix over the requested region
    ("omega" or "omega_tilde"); rows/cols indexed by all nodes."""
    if region not in ("omega", "omega_tilde"):
        raise ValueError(f"unknown region {region!r}")
    n = mesh.n_nodes
    M = np.zeros((n, n))
    a, b = mesh.element_bounds
    take = mesh.interior_element_mask if region == "omega" else np.ones(mesh.n_elements, bool)
    for e in np.flatnonzero(take):
        le = b[e] - a[e]
        i, j = mesh.elements[e]
        M[i, i] += le / 3.0
        M[j, j] += le / 3.0
        M[i, j] += le / 6.0
        M[j, i] += le / 6.0
    return M


def assemble_laplacian(mesh: Mesh1D) -> np.ndarray:
    """P1 stiffness over omega with natural boundary conditions, used by
    the local (classical diffusion) reference runs."""
    n = mesh.n_nodes
    A = np.zeros((n, n))
    a, b = mesh.element_bounds
    for e in np.flatnonzero(mesh.interior_element_mask):
        le = b[e] - a[e]
        i, j = mesh.elements[e]
        A[i, i] += 1.0 / le
        A[j, j] += 1.0 / le
        A[i, j] -= 1.0 / le
        A[j, i] -= 1.0 / le
    return A


def _inner_edges(nodes: np.ndarray, lo: float, hi: float, x: float,
                 kink: bool, cap: float = math.inf) -> np.ndarray:
    """Panel edges for the inner integral at outer point x: element
    boundaries inside (lo, hi), the clip bounds, a split at x, and a
    width cap so that rapidly decaying kernels stay resolved even on
    meshes coarser than the kernel scale."""
    i0 = int(np.searchsorted(nodes, lo, side="right"))
    i1 = int(np.searchsorted(nodes, hi, side="left"))
    pieces = [np.array([lo, hi]), nodes[i0:i1]]
    if kink and lo < x < hi:
        pieces.append(np.array([x]))
    edges = np.unique(np.concatenate(pieces))
    if not np.isfinite(cap) or np.all(np.diff(edges) <= cap):
        return edges
    refined = [edges[:1]]
    for a, b in zip(edges[:-1], edges[1:]):
        parts = int(math.ceil((b - a) / cap))
        refined.append(np.linspace(a, b, parts + 1)[1:])
    return np.concatenate(refined)


def assemble_kernel_coupling(mesh: Mesh1D, kernel, bc: BcMode,
                             q: QuadratureRule = ASSEMBLY_RULE) -> np.ndarray:
    """Coupling matrix G_ij = int int gamma(x - y) phi_j(y) phi_i(x).

    The exact integral is symmetric in (i, j); the outer/inner quadrature
    split leaves a residual asymmetry at quadrature-error level, which is
    removed by averaging with the transpose before returning.
    """
    lo, hi = _check_bc(mesh, kernel, bc)
    nodes = mesh.nodes
    n = mesh.n_nodes
    R = kernel.horizon
    kink = kernel.kink_at_zero
    G = np.zeros((n, n))

    cap = 0.5 * getattr(kernel, "decay_scale", math.inf)
    el = 1.0 / (nodes[mesh.elements[:, 1]] - nodes[mesh.elements[:, 0]])
    elem_idx, xs, ws = _outer_points(mesh, q, cap)
    for e, x, w in zip(elem_idx, xs, ws):
        iL, iR = mesh.elements[e]
        c_lo = max(x - R, lo) if np.isfinite(R) else lo
        c_hi = min(x + R, hi) if np.isfinite(R) else hi
        if c_hi <= c_lo:
            continue
        y, wy = _panel_points(_inner_edges(nodes, c_lo, c_hi, x, kink, cap), q)
        vals = w * wy * kernel.eval(x - y)
        k = np.clip(np.searchsorted(nodes, y, side="right") - 1, 0, mesh.n_elements - 1)
        t = (y - nodes[k]) * el[k]   # local coordinate in element k
        row = (np.bincount(k, weights=vals * (1.0 - t), minlength=n)
               + np.bincount(k + 1, weights=vals * t, minlength=n))
        phi_r = (x - nodes[iL]) * el[e]
        G[iL] += (1.0 - phi_r) * row
        G[iR] += phi_r * row
    return 0.5 * (G + G.T)


def assemble_gamma_mass(mesh: Mesh1D, kernel, bc: BcMode,
                        q: QuadratureRule = ASSEMBLY_RULE) -> np.ndarray:
    """Mass matrix weighted by the reachable kernel mass Gamma(x).

    Dirichlet: Gamma is the constant full-line mass, so this is an exact
    scaled mass matrix.  Neumann: Gamma(x) comes from the closed-form
    partial mass at every quadrature point, leaving no inner quadrature
    error.
    """
    lo, hi = _check_bc(mesh, kernel, bc)
    if bc == BcMode.DIRICHLET:
        return kernel.total_mass() * assemble_mass(mesh, region="omega")

    n = mesh.n_nodes
    D = np.zeros((n, n))
    cap = 0.5 * getattr(kernel, "decay_scale", math.inf)
    elem_idx, xs, ws = _outer_points(mesh, q, cap)
    gam = partial_mass_at(kernel, xs, lo, hi)
    a, b = mesh.element_bounds
    t = (xs - a[elem_idx]) / (b[elem_idx] - a[elem_idx])
    wg = ws * gam
    iL = mesh.elements[elem_idx, 0]
    iR = mesh.elements[elem_idx, 1]
    np.add.at(D, (iL, iL), wg * (1.0 - t) ** 2)
    np.add.at(D, (iR, iR), wg * t ** 2)
    cross = wg * t * (1.0 - t)
    np.add.at(D, (iL, iR), cross)
    np.add.at(D, (iR, iL), cross)
    return D


def assemble_nonlocal(mesh: Mesh1D, kernel, bc: BcMode,
                      q: QuadratureRule = ASSEMBLY_RULE) -> AssembledOperators:
    """Assemble every operator the time steppers need."""
    G = assemble_kernel_coupling(mesh, kernel, bc, q)
    D = assemble_gamma_mass(mesh, kernel, bc, q)
    return AssembledOperators(
        mass_omega=assemble_mass(mesh, region="omega"),
        coupling=G,
        gamma_mass=D,
        nonlocal_op=D - G,
        laplacian=assemble_laplacian(mesh),
    )


def assemble_local(mesh: Mesh1D) -> AssembledOperators:
    """Operators for a classical-diffusion reference run (no kernel)."""
    return AssembledOperators(
        mass_omega=assemble_mass(mesh, region="omega"),
        coupling=None,
        gamma_mass=None,
        nonlocal_op=None,
        laplacian=assemble_laplacian(mesh),
    )


class KernelApplyPlan:
    """Frozen quadrature layout for applying K in strong form at a fixed
    set of evaluation points.

    Building the plan fixes, per point x, the composite Gauss panels of
    the inner integral (width-capped, split at y = x and at the horizon
    ends, optionally refined at caller-supplied breakpoints) and the
    products weight * gamma(x - y).  Applying the plan to a function only
    needs one vectorized evaluation on the stored inner points.
    """

    def __init__(self, x: np.ndarray, kernel, bc: BcMode,
                 domain: tuple[float, float], h_quad: float | None = None,
                 breakpoints: np.ndarray | None = None,
                 rule: QuadratureRule = STRONG_FORM_RULE):
        lo, hi = float(domain[0]), float(domain[1])
        if h_quad is None:
            # cap panel width by the kernel's decay scale so that sharp
            # dispersal kernels stay resolved on wide domains
            h_quad = min(0.01 * (hi - lo), 0.5 * getattr(kernel, "decay_scale", math.inf))
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.size and (x.min() < lo - 1e-12 or x.max() > hi + 1e-12):
            raise ValueError("evaluation points must lie in the integration domain")
        R = kernel.horizon
        y_parts, w_parts, counts = [], [], []
        for xi in x:
            c_lo = max(xi - R, lo) if np.isfinite(R) else lo
            c_hi = min(xi + R, hi) if np.isfinite(R) else hi
            n_pan = max(1, int(math.ceil((c_hi - c_lo) / h_quad)))
            pieces = [np.linspace(c_lo, c_hi, n_pan + 1)]
            cuts = [xi] if kernel.kink_at_zero else []
            if np.isfinite(R):
                cuts += [xi - R, xi + R]
            if breakpoints is not None:
                cuts += list(np.asarray(breakpoints, dtype=float))
            cuts = [c for c in cuts if c_lo < c < c_hi]
            if cuts:
                pieces.append(np.array(cuts))
            y, wy = _panel_points(np.unique(np.concatenate(pieces)), rule)
            y_parts.append(y)
            w_parts.append(wy * kernel.eval(xi - y))
            counts.append(y.size)

        self.x = x
        self.y = np.concatenate(y_parts) if y_parts else np.empty(0)
        self.w_gamma = np.concatenate(w_parts) if w_parts else np.empty(0)
        self.offsets = np.concatenate([[0], np.cumsum(counts)]).astype(np.intp)
        if bc == BcMode.DIRICHLET:
            self.gamma_x = np.full(x.size, kernel.total_mass())
        else:
            self.gamma_x = partial_mass_at(kernel, x, lo, hi)

    def apply(self, u) -> np.ndarray:
        """K u at the plan's points; u must accept coordinate arrays."""
        u_inner = np.asarray(u(self.y), dtype=float)
        conv = np.add.reduceat(self.w_gamma * u_inner, self.offsets[:-1])
        return conv - self.gamma_x * np.asarray(u(self.x), dtype=float)


def eval_K_strong(u, x: float, kernel, bc: BcMode,
                  domain: tuple[float, float], h_quad: float | None = None,
                  breakpoints: np.ndarray | None = None) -> float:
    """K u at a single point by composite Gauss quadrature.

    Under the Dirichlet constraint the domain is omega and u is zero
    extended (the convolution restricts, Gamma stays the full-line
    mass); under Neumann the domain is the extended one.
    """
    plan = KernelApplyPlan(np.array([x]), kernel, bc, domain,
                           h_quad=h_quad, breakpoints=breakpoints)
    return float(plan.apply(u)[0])


def dump_matrix(matrix: np.ndarray, path) -> None:
    """Plain-text dense dump: a 'rows cols' header, then row-major
    entries, for cross-checks with external tools."""
    rows, cols = matrix.shape
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{rows} {cols}\n")
        for r in range(rows):
            fh.write(" ".join(f"{v:.17g}" for v in matrix[r]) + "\n")
