import os

DEFAULT_TOL = 1e-9


def get_tol() -> float:
    """Default absolute tolerance, overridable through ``POLYFLOW_TOL``."""
    raw = os.environ.get("POLYFLOW_TOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        return DEFAULT_TOL
    return tol if tol > 0 else DEFAULT_TOL
