"""Uniform conforming 1D meshes over an extended domain.

The solution domain is an interval ``omega``.  For volume-constrained
Neumann problems the mesh extends past it by a collar of prescribed width
on each side; the constraint is enforced there.  Nodes are tagged by the
region they fall in.  Meshes are immutable after construction and safe to
share across threads.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

_REL_TOL = 1e-12


class Region(IntEnum):
    INTERIOR = 0
    COLLAR = 1


class NonDivisibleSpacing(ValueError):
    """Spacing h does not tile the domain and/or the collar exactly."""


@dataclass(frozen=True)
class Mesh1D:
    nodes: np.ndarray          # strictly increasing coordinates
    elements: np.ndarray       # (n_elements, 2) adjacent node index pairs
    omega_bounds: tuple[float, float]
    collar_width: float
    node_region: np.ndarray    # Region value per node
    h: float                   # max element length

    def __post_init__(self):
        lengths = np.diff(self.nodes)
        if not np.all(lengths > 0.0):
            raise ValueError("nodes must be strictly increasing")
        lo, hi = self.extended_bounds
        if abs(lengths.sum() - (hi - lo)) > _REL_TOL * (hi - lo):
            raise ValueError("elements do not tile the extended domain")

    @property
    def n_nodes(self) -> int:
        return self.nodes.size

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def extended_bounds(self) -> tuple[float, float]:
        return (self.omega_bounds[0] - self.collar_width,
                self.omega_bounds[1] + self.collar_width)

    @property
    def element_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes[self.elements[:, 0]], self.nodes[self.elements[:, 1]]

    @property
    def interior_element_mask(self) -> np.ndarray:
        """Elements whose interior lies in omega (the mesh conforms, so
        midpoints decide exactly)."""
        a, b = self.element_bounds
        mids = 0.5 * (a + b)
        x_lo, x_hi = self.omega_bounds
        return (mids >= x_lo) & (mids <= x_hi)


def _tile_count(length: float, h: float, what: str) -> int:
    n = int(round(length / h))
    if n < 1 or abs(n * h - length) > _REL_TOL * max(length, 1.0):
        raise NonDivisibleSpacing(
            f"h={h!r} does not tile the {what} of length {length!r}; "
            f"nodes must land exactly on the region boundaries")
    return n


def build_uniform(omega: tuple[float, float], collar_width: float,
                  h: float) -> Mesh1D:
    """Uniform mesh of spacing h over omega extended by the collar.

    h must divide both |omega| and the collar width (to 1e-12 relative)
    so that nodes land exactly on the region boundaries; otherwise
    NonDivisibleSpacing is raised.
    """
    x_lo, x_hi = float(omega[0]), float(omega[1])
    if x_hi <= x_lo:
        raise ValueError("empty domain")
    if h <= 0.0:
        raise ValueError("h must be positive")
    if collar_width < 0.0:
        raise ValueError("collar width must be nonnegative")

    n_omega = _tile_count(x_hi - x_lo, h, "domain")
    n_collar = _tile_count(collar_width, h, "collar") if collar_width > 0 else 0

    lo = x_lo - collar_width
    hi = x_hi + collar_width
    n = n_omega + 2 * n_collar
    nodes = lo + np.arange(n + 1) * ((hi - lo) / n)
    nodes[0], nodes[-1] = lo, hi
    if lo == -hi:
        # exact mirror symmetry for symmetric domains (keeps even initial
        # data even to the last bit)
        nodes = 0.5 * (nodes - nodes[::-1])

    elements = np.column_stack([np.arange(n), np.arange(1, n + 1)])
    tol = _REL_TOL * max(abs(lo), abs(hi), 1.0)
    interior = (nodes >= x_lo - tol) & (nodes <= x_hi + tol)
    node_region = np.where(interior, Region.INTERIOR, Region.COLLAR).astype(np.int8)
    return Mesh1D(nodes=nodes, elements=elements,
                  omega_bounds=(x_lo, x_hi), collar_width=float(collar_width),
                  node_region=node_region, h=float(np.max(np.diff(nodes))))


def elements_within_horizon(mesh: Mesh1D, x: float, R: float) -> np.ndarray:
    """Indices of elements with positive-measure overlap with
    [x - R, x + R] intersected with the extended domain.

    R may be infinite, in which case every element is returned.  The
    result is always a contiguous range.
    """
    lo, hi = mesh.extended_bounds
    if not (lo <= x <= hi):
        raise ValueError(f"x={x!r} outside the extended domain [{lo}, {hi}]")
    if np.isinf(R):
        return np.arange(mesh.n_elements)
    a = max(x - R, lo)
    b = min(x + R, hi)
    if b <= a:
        return np.arange(0)
    # first element with right node > a, last with left node < b
    i0 = int(np.searchsorted(mesh.nodes, a, side="right")) - 1
    i0 = max(i0, 0)
    i1 = int(np.searchsorted(mesh.nodes, b, side="left"))
    i1 = min(i1, mesh.n_elements)
    return np.arange(i0, i1)
