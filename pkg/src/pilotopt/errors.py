"""Error types shared across the package."""


class ConfigError(Exception):
    """Invalid configuration value, file, or geometry."""


class SolverError(Exception):
    """Conic solve failed (infeasible status, iteration limit, or numerical breakdown)."""
