"""
Unit tests for the exception hierarchy
"""
import pytest


class TestErrorHierarchy:
    """Test that every error derives from WorkbenchError"""

    @pytest.mark.parametrize("name", [
        "NotInvertible", "RingMismatch", "ArityMismatch", "SizeLimit", "DomainError",
        "NonFinite", "NoConvergence", "NotDifferentiable", "PartitionMismatch",
        "OrderUnsupported", "LipschitzViolated", "SingularCoefficient", "ResidualTooLarge",
        "DegenerateConfig", "DegreeCapExceeded", "ExprSyntaxError", "UnknownFunction",
        "UsageError",
    ])
    def test_subclass_of_workbench_error(self, name):
        """Test the common base class"""
        from src.difq_workbench import errors

        assert issubclass(getattr(errors, name), errors.WorkbenchError)

    def test_standard_categories(self):
        """Test that errors are also standard Python categories"""
        from src.difq_workbench import errors

        assert issubclass(errors.NotInvertible, ArithmeticError)
        assert issubclass(errors.DomainError, ValueError)
        assert issubclass(errors.RingMismatch, TypeError)

    def test_no_convergence_carries_level_and_estimate(self):
        """Test the attached diagnostic data"""
        from src.difq_workbench.errors import NoConvergence

        exc = NoConvergence("slow", level=3, estimate=[1.0])
        assert exc.level == 3
        assert exc.estimate == [1.0]

    def test_not_differentiable_carries_gap(self):
        """Test the one-sided gap"""
        from src.difq_workbench.errors import NotDifferentiable

        assert NotDifferentiable("kink", gap=2.0).gap == 2.0

    def test_syntax_error_position(self):
        """Test the 1-based position in message and attribute"""
        from src.difq_workbench.errors import ExprSyntaxError

        exc = ExprSyntaxError("unexpected end of input", 4)
        assert exc.position == 4
        assert "position 4" in str(exc)

    def test_unknown_function_names_identifier(self):
        """Test the offending identifier"""
        from src.difq_workbench.errors import UnknownFunction

        exc = UnknownFunction("tan", 1)
        assert exc.name == "tan"
        assert exc.position == 1
