"""Potential theory for randomly perturbed harmonic functions.

Subpackages and modules
-----------------------
geometry
    Domains, quadrature grids and curvilinear frames.
grf
    Covariance kernels and exact Gaussian field sampling.
harmonic
    Deterministic harmonic functions, Dirichlet solvers and classical estimates.
potentials
    Riesz and Newtonian potentials of ball densities.
wos
    Walk-on-spheres solvers.
stochastic
    Perturbed harmonic functions, closed forms and Monte Carlo checks.
estimators
    scikit-learn style wrappers.
"""

from . import exceptions, geometry, grf, harmonic, mc, potentials, stochastic, wos
from .estimators import (BallDirichletSolver, DiscDirichletSolver, GaussianFieldSampler,
                         WalkOnSpheresSolver)
from .exceptions import StochpotError
from .geometry import Ball, Cylinder, Disc, Shell, build_grid, circle_grid, sphere_grid
from .grf import (Exponential, FieldSample, FieldSampler, GaussianCorr, PowerLaw, Separable,
                  WhiteNoise, gaussian_moment, kc_admissible, kernel_eval, paper_moment,
                  sample_field)
from .harmonic import (BoundaryData, ComplexPoly, Linear, ball_poisson_eval, boundary_preset,
                       disc_fourier_eval, disc_fourier_solve, disc_poisson_eval)
from .potentials import (RieszSpec, ball_integral_closed, ball_newton_closed,
                         ball_newton_gradient_closed, riesz_potential)
from .stochastic import Report
from .wos import WalkConfig, WalkResult, wos_laplace, wos_poisson

__version__ = "0.1.0"

__all__ = [
    "Ball", "BallDirichletSolver", "BoundaryData", "ComplexPoly", "Cylinder", "Disc",
    "DiscDirichletSolver", "Exponential", "FieldSample", "FieldSampler", "GaussianCorr",
    "GaussianFieldSampler", "Linear", "PowerLaw", "Report", "RieszSpec", "Separable", "Shell",
    "StochpotError", "WalkConfig", "WalkOnSpheresSolver", "WalkResult", "WhiteNoise",
    "ball_integral_closed", "ball_newton_closed", "ball_newton_gradient_closed",
    "ball_poisson_eval", "boundary_preset", "build_grid", "circle_grid", "disc_fourier_eval",
    "disc_fourier_solve", "disc_poisson_eval", "exceptions", "gaussian_moment", "geometry",
    "grf", "harmonic", "kc_admissible", "kernel_eval", "mc", "paper_moment", "potentials",
    "riesz_potential", "sample_field", "sphere_grid", "stochastic", "wos", "wos_laplace",
    "wos_poisson",
]
