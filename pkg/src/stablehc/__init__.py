"""Small-time spectral heat content of isotropic stable processes.

Simulation and special-function toolkit: exact subordinator sampling,
Monte Carlo heat-loss estimators on a catalog of smooth domains, the
double-gamma Mellin transform of the stable running supremum, certified
stable-density series and fractional-perimeter quadrature.
"""

__version__ = "0.1.0"
