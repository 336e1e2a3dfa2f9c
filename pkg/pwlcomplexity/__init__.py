__version__ = "0.1.0"

__all__ = [
    "arrangement",
    "bounds",
    "complexity",
    "network",
    "regions",
    "symmetry",
]
