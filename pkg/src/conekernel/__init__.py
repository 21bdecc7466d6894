"""Weighted Green's-function machinery on polyhedral cones and polyhedrons.

Subpackages by capability:

- ``geometry``  -- domains, distances, angles, assumption checks
- ``spectral``  -- Laplace-Beltrami Dirichlet eigenvalues on spherical
  polygons, spherical areas, cap lower bounds
- ``exponents`` -- critical boundary-decay exponents and admissible ranges
- ``weights``   -- mixed distance-power weights and the Gaussian factor
- ``sde_mc``    -- killed-diffusion Monte Carlo Green's-function estimation
- ``oracles``   -- exact/series reference kernels (free space, half-space,
  wedges, boxes)
- ``verify``    -- bound checks, decay-exponent fits, structural identities
- ``cli``       -- command-line front end
"""

from . import (  # noqa: F401
    exponents,
    geometry,
    oracles,
    sde_mc,
    spectral,
    verify,
    weights,
)

__version__ = "0.1.0"
