"""
Difference Quotient Workbench
Core functionality for exact and numeric difference-quotient calculus
"""

from .version import __version__

__all__ = ["__version__"]
