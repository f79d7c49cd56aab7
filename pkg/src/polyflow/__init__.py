"""Water levels over polymatroids and online assignment solvers built on them."""
__version__ = "0.1.0"
