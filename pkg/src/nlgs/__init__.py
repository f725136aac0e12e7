"""Gray-Scott dynamics with integral diffusion: P1 finite elements,
semi-implicit first-order time stepping, volume-constrained boundary
conditions, a manufactured-solution convergence harness, and a steady
pulse experiment suite."""

__version__ = "0.1.0"
