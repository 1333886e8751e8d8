"""
Difference Quotient Workbench
Exact, numeric and grid-level verification of difference-quotient calculus
"""

__version__ = "0.1.0"
