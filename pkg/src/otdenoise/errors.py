"""Exception types shared across the package."""


class SinkhornConvergenceError(RuntimeError):
    """Sinkhorn iterations ran out before reaching the marginal tolerance."""

    def __init__(self, iterations: int, marginal_error: float, tol: float):
        self.iterations = iterations
        self.marginal_error = marginal_error
        self.tol = tol
        super().__init__(
            f"no convergence after {iterations} iterations: "
            f"marginal error {marginal_error:.3e} > tol {tol:.3e}")


class EnumerationBudgetError(RuntimeError):
    """An exhaustive map enumeration would exceed the configured budget."""

    def __init__(self, n_maps: int, budget: int):
        self.n_maps = n_maps
        self.budget = budget
        super().__init__(f"{n_maps} candidate maps exceed budget {budget}")


class TrainingDivergedError(RuntimeError):
    """Training loss blew up; carries the curve recorded so far."""

    def __init__(self, message: str, curve):
        self.curve = curve
        super().__init__(message)


class ConfigError(ValueError):
    """Config file failed schema validation; message names field and line."""
