"""Perturbed harmonic functions and potentials: closed forms and Monte Carlo checks."""

from .boundary import (arctan_moment, ball_poisson_weights, disc_poisson_weights,
                       graded_sphere_grid, noisy_boundary_ball, noisy_boundary_disc,
                       paper_surface_integral, quadratic_form)
from .calculus import (bochner_shifted_value, cacciopolli_condition, gradient_stencil,
                       loop_double_integral, sadei, stochastic_bochner, stochastic_cacciopolli,
                       stochastic_line_integral)
from .flows import cylinder_boundary_stats, kelvin_energy, turbulent_flow_stats
from .moments import (KERNEL_TABLE, averaged_max_principle, binomial_moment, perturbed_mvp,
                      sampler_fidelity, stochastic_harnack)
from .report import (COLUMNS, MomentReport, PerturbedField, Report, check_row, exact_row,
                     info_row, mc_row, note_row, ratio_row)
from .riesz import (force_moments, gaussian_sum_moment, laplacian_moments, noisy_density_newton,
                    riesz_noise_samples, stochastic_riesz_moments)

__all__ = [
    "COLUMNS", "KERNEL_TABLE", "MomentReport", "PerturbedField", "Report",
    "arctan_moment", "averaged_max_principle", "ball_poisson_weights", "binomial_moment",
    "bochner_shifted_value", "cacciopolli_condition", "check_row", "cylinder_boundary_stats",
    "disc_poisson_weights", "exact_row", "force_moments", "gaussian_sum_moment",
    "gradient_stencil", "graded_sphere_grid", "info_row", "kelvin_energy", "laplacian_moments",
    "loop_double_integral", "mc_row", "noisy_boundary_ball", "noisy_boundary_disc",
    "noisy_density_newton", "note_row", "paper_surface_integral", "perturbed_mvp",
    "quadratic_form", "ratio_row", "riesz_noise_samples", "sadei", "sampler_fidelity",
    "stochastic_bochner", "stochastic_cacciopolli", "stochastic_harnack",
    "stochastic_line_integral", "stochastic_riesz_moments", "turbulent_flow_stats",
]
