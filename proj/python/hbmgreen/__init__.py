"""Green functions and potentials of hyperbolic Brownian motion.

Thin wrapper over the compiled extension. Points are sequences whose last
entry is the height x_n; failures raise HbmError with a ``code`` attribute.
"""

from ._hbmgreen import (  # noqa: F401
    EvalResult,
    HbmError,
    bessel_free_density,
    bessel_hitting_density,
    bessel_i,
    bessel_k,
    bessel_killed_density,
    bracket_s,
    green_ab,
    green_cell_integral,
    green_comparator,
    green_comparator_distance,
    green_function,
    hartman_watson_theta,
    hyperbolic_distance,
    incomplete_gamma,
    joint_density,
    killed_density_comparator,
    lamperti_check,
    potential_comparator,
    potential_kernel,
    q_hitting_density,
    q_potential,
    simulate_gbm,
    simulate_hbm,
)

__version__ = "0.1.0"
