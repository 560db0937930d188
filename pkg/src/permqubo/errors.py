"""Exception types shared across the package."""


class SizeCapError(Exception):
    """A requested computation exceeds a hard size guard (qubit/state caps)."""


class SolverError(RuntimeError):
    """A numerical solver failed (non-convergence, non-finite amplitudes)."""
