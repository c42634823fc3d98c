"""Exception and warning types shared across the package."""


class PolyaError(Exception):
    """Base class for all errors raised by :mod:`polya`."""


class DivergenceError(PolyaError, ValueError):
    """Raised for dimensions d = 1, 2 where the walk is recurrent.

    The Bessel integral and the F_C series for u(d) are not convergent
    there; p(1) = p(2) = 1.
    """

    def __init__(self, d):
        self.d = d
        super().__init__(
            f"u(d) is not convergent for d={d}: the walk is recurrent for d=1,2 "
            f"(p(1)=p(2)=1); a finite return constant requires d >= 3"
        )


class ConstraintError(PolyaError, ValueError):
    """A parameter set violates a named hypothesis.

    ``hypothesis`` is one of ``"order"``, ``"exponent"``, ``"convergence"``,
    ``"boundary"`` or ``"argument"``.
    """

    def __init__(self, hypothesis, message):
        self.hypothesis = hypothesis
        super().__init__(f"[{hypothesis}] {message}")


class ResourceError(PolyaError, RuntimeError):
    """Requested work exceeds a configured budget."""


class ConvergenceWarning(RuntimeWarning):
    """Series arguments lie outside the declared convergence domain."""
