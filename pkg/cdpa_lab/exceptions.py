from typing import List, Optional


class CdpaError(Exception):
    """Base exception for the toolkit"""
    pass


class InvalidArgumentError(CdpaError, ValueError):
    """Raised when an operation receives arguments outside its contract"""
    pass


class DivergenceError(CdpaError):
    """Numerical state became non-finite"""
    pass


class SimulationDivergedError(DivergenceError):
    """Circuit integration produced a non-finite state"""

    def __init__(self, step: int, message: Optional[str] = None):
        self.step = step
        super().__init__(message or f"Simulation diverged at integration step {step}")


class TrainingDivergedError(DivergenceError):
    """Network training produced a non-finite error or gradient"""

    def __init__(self, iteration: int, message: Optional[str] = None):
        self.iteration = iteration
        super().__init__(message or f"Training diverged at iteration {iteration}")


class ConfigError(CdpaError):
    """Experiment configuration could not be read or validated"""

    def __init__(self, message: str, errors: Optional[List[dict]] = None):
        self.errors = errors or []
        super().__init__(message)


class OutputError(CdpaError):
    """Output directory could not be prepared"""
    pass
