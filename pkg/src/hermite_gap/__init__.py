"""Neumann eigenvalues of the Hermite operator on symmetric planar domains.

Subpackages are organised by layer: Gaussian quadrature (:mod:`.gaussian`),
geometry (:mod:`.geometry`, :mod:`.mesh`), eigensolvers (:mod:`.eigen`,
:mod:`.solver1d`, :mod:`.solver2d`) and verification (:mod:`.checks`,
:mod:`.report`, :mod:`.battery`, :mod:`.cli`).
"""

from .geometry import build_domain, diameter, half_domain, invading_sequence, load_domain
from .solver1d import lambda1_interval, mu1_interval, weighted_mu1
from .solver2d import mu1_odd, neumann_spectrum, rayleigh_upper_bound, solve_unbounded

__version__ = "0.1.0"

__all__ = ["build_domain", "diameter", "half_domain", "invading_sequence", "load_domain",
           "lambda1_interval", "mu1_interval", "weighted_mu1", "mu1_odd", "neumann_spectrum",
           "rayleigh_upper_bound", "solve_unbounded"]
