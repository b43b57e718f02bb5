from typing import Optional


class FCTError(Exception):
    """Base class for solver failures"""

    def __init__(self, message: str, step: Optional[int] = None):
        super().__init__(message)
        self.step = step

    def __str__(self) -> str:
        base = super().__str__()
        if self.step is None:
            return base
        return f"{base} (step {self.step})"


class ConfigValidationError(FCTError):
    """Invalid run configuration; the message lists the offending field paths"""

    @classmethod
    def from_pydantic(cls, exc) -> "ConfigValidationError":
        parts = []
        for err in exc.errors():
            path = ".".join(str(p) for p in err.get("loc", ())) or "<root>"
            parts.append(f"{path}: {err.get('msg')}")
        return cls("; ".join(parts))


class UnknownProblemError(ValueError):
    """Problem name is not registered"""
    pass


class CFLViolationError(FCTError):
    """Time step exceeds the explicit stability bound"""

    def __init__(self, dt: float, dt_max: float, step: Optional[int] = None):
        super().__init__(f"dt={dt:.6e} exceeds max stable dt={dt_max:.6e}", step)
        self.dt = dt
        self.dt_max = dt_max


class PicardDivergenceError(FCTError):
    """Picard iteration did not meet its stop criterion"""

    def __init__(self, iterations: int, state_change: float, alpha_n_change: float,
                 alpha_np1_change: float, step: Optional[int] = None):
        super().__init__(
            f"Picard iteration not converged after {iterations} iterations "
            f"(state={state_change:.3e}, alpha_n={alpha_n_change:.3e}, alpha_np1={alpha_np1_change:.3e})",
            step,
        )
        self.iterations = iterations
        self.residuals = (state_change, alpha_n_change, alpha_np1_change)


class NonlinearSolveError(FCTError):
    """Newton iteration and fallback sweeps failed"""

    def __init__(self, residual: float, step: Optional[int] = None):
        super().__init__(f"nonlinear implicit solve failed, residual={residual:.3e}", step)
        self.residual = residual


class SingularOperatorError(FCTError):
    """Banded operator has a vanishing pivot"""
    pass


class LPError(FCTError):
    """Simplex breakdown (unbounded direction or pivot cap)"""
    pass
