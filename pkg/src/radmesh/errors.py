"""Exception types shared across the package."""


class MeshFoldedError(RuntimeError):
    """Raised when a mesh has a non-positive Jacobian somewhere.

    Carries the grid index of the first offending node (C order) and the
    Jacobian value found there.
    """

    def __init__(self, m: int, n: int, value: float, context: str = ""):
        self.node = (m, n)
        self.value = value
        msg = f"mesh folded: J={value:.3e} at node (m={m}, n={n})"
        if context:
            msg = f"{msg} [{context}]"
        super().__init__(msg)


class SingularMatrixError(RuntimeError):
    """Raised when a sparse factorization hits a singular pivot."""


class ConfigError(ValueError):
    """Raised for malformed configuration files or inconsistent settings."""
