"""Polya random walk return probabilities on Z^d for d >= 3.

Three independent routes to the return constant u(d), with
p(d) = 1 - 1/u(d):

* ``series.u_series``: the collapsed Lauricella F_C series,
* ``quad.u_quadrature``: the Bessel integral with an analytic tail,
* ``specfun.gamma_product_u3``: the closed form for d = 3.

``laplace`` checks the general Laplace-transform identity behind the F_C
form, ``quad.lattice_green_integral`` and ``walk.estimate_return`` give
integration- and simulation-based cross-checks.
"""

from .errors import ConstraintError, ConvergenceWarning, DivergenceError, PolyaError, ResourceError
from .quad import QuadratureConfig, u_quadrature
from .series import (
    LauricellaParams,
    Method,
    SeriesConfig,
    lauricella_fc,
    return_probability,
    sum_multi_coeff,
    u_series,
)
from .specfun import bessel_i, gamma_product_u3, log_gamma, pochhammer

__version__ = "0.1.0"
