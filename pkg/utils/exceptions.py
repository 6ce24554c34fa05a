"""
LinAmalg error taxonomy
Structured exceptions with stable error codes and CLI exit codes
"""

from typing import Optional, Dict, Any
import logging

logger = logging.getLogger(__name__)


class LinAmalgException(Exception):
    """Base class for every error raised by LinAmalg"""

    error_code: str = "UNKNOWN_ERROR"
    user_message: str = "An unknown error occurred"
    exit_code: int = 2
    should_log: bool = True

    def __init__(self,
                 message: Optional[str] = None,
                 user_message: Optional[str] = None,
                 details: Optional[Dict[str, Any]] = None):
        self.message = message or self.__class__.__name__
        self.user_message = user_message or self.__class__.user_message
        self.details = details or {}

        super().__init__(self.message)

        if self.should_log:
            logger.debug(f"{self.error_code}: {self.message}", extra={"details": self.details})

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a dictionary (used by the JSON report)"""
        return {
            "error_code": self.error_code,
            "message": self.user_message,
            "details": self.details
        }


# Input validation
class ValidationException(LinAmalgException):
    """Base class for precondition failures"""
    error_code = "VALIDATION_ERROR"
    user_message = "Input validation failed"
    exit_code = 2


class SignatureMismatchException(ValidationException):
    """A symbol is unknown or used with the wrong arity"""
    error_code = "SIGNATURE_MISMATCH"
    user_message = "Term or algebra does not match the signature"


class LinearityException(ValidationException):
    """A linear (flat) equation or theory was required"""
    error_code = "NOT_LINEAR"
    user_message = "The equation or theory is not linear"


class ParseException(ValidationException):
    """Malformed theory or algebra file"""
    error_code = "PARSE_ERROR"
    user_message = "Could not parse the input file"

    def __init__(self, message: str, line_no: Optional[int] = None, source: Optional[str] = None):
        super().__init__(
            message=f"{source or '<input>'}:{line_no}: {message}" if line_no else message,
            details={"line": line_no, "source": source}
        )


class MissingBindingException(ValidationException):
    """Assignment does not cover the variables of a term"""
    error_code = "MISSING_BINDING"
    user_message = "Assignment is missing a variable"


class OverlapMismatchException(ValidationException):
    """Carriers violate A ∩ B = C"""
    error_code = "OVERLAP_MISMATCH"
    user_message = "The carriers of A and B must intersect exactly in C"


class SubalgebraFailureException(ValidationException):
    """C is not a subalgebra of A or of B"""
    error_code = "SUBALGEBRA_FAILURE"
    user_message = "C must be a subalgebra of both A and B"


class ConstantClashException(ValidationException):
    """A and B disagree on which constants coincide"""
    error_code = "CONSTANT_CLASH"
    user_message = "A and B identify different constants"


class EmptyBaseException(ValidationException):
    """The constant / non-equilinear construction needs a nonempty C"""
    error_code = "EMPTY_BASE"
    user_message = "This theory needs a nonempty common subalgebra"


class PolicyPartialException(ValidationException):
    """A default policy was queried outside its domain"""
    error_code = "POLICY_PARTIAL"
    user_message = "The default policy is not defined on a queried set"


class JepUnsupportedException(ValidationException):
    """The theory is outside the joint embedding constructions"""
    error_code = "JEP_UNSUPPORTED"
    user_message = "Joint embedding is not guaranteed for this theory"


class HkPreconditionException(ValidationException):
    """Inputs violate k(h(x)) = h(k(x)) = x, h(c) = c or a respected homomorphism law"""
    error_code = "HK_PRECONDITION"
    user_message = "The h/k expansion of an input is not valid"


class NotAModelException(ValidationException):
    """An input algebra violates an axiom"""
    error_code = "NOT_A_MODEL"
    user_message = "An input algebra does not satisfy the theory"


class TrivialTheoryException(ValidationException):
    """The theory only has one-element models"""
    error_code = "TRIVIAL_THEORY"
    user_message = "The theory is trivial (only one-element models)"


# Budget
class BudgetExceededException(LinAmalgException):
    """A brute-force search would exceed the configured budget"""
    error_code = "BUDGET_EXCEEDED"
    user_message = "The search space exceeds the configured budget"
    exit_code = 3

    def __init__(self, needed: int = 0, budget: int = 0, what: str = "search"):
        super().__init__(
            message=f"{what} needs {needed} candidates, budget is {budget}",
            details={"needed": needed, "budget": budget, "what": what}
        )


# Internal
class InvariantViolationException(LinAmalgException):
    """A proven property failed at run time; signals a bug"""
    error_code = "INVARIANT_VIOLATION"
    user_message = "Internal invariant violated, please report this input"
    exit_code = 4


class ExceptionHandler:
    """Uniform exception-to-report conversion"""

    @staticmethod
    def handle_exception(e: Exception) -> Dict[str, Any]:
        """
        Convert an exception to a standard error record

        Args:
            e: the exception

        Returns:
            Dict: error record with exit code
        """
        if isinstance(e, LinAmalgException):
            return {
                "success": False,
                "error_code": e.error_code,
                "message": e.user_message,
                "exit_code": e.exit_code,
                "details": e.details
            }
        logger.exception("Unexpected exception occurred")
        return {
            "success": False,
            "error_code": "UNEXPECTED_ERROR",
            "message": "Unexpected error",
            "exit_code": InvariantViolationException.exit_code,
            "details": {}
        }

    @staticmethod
    def get_user_friendly_message(e: Exception) -> str:
        if isinstance(e, LinAmalgException):
            return f"{e.user_message}: {e.message}"
        return f"Unexpected error: {e}"


EXCEPTION_CATEGORIES = {
    "validation": [
        ValidationException,
        SignatureMismatchException,
        LinearityException,
        ParseException,
        MissingBindingException,
        OverlapMismatchException,
        SubalgebraFailureException,
        ConstantClashException,
        EmptyBaseException,
        PolicyPartialException,
        JepUnsupportedException,
        HkPreconditionException,
        NotAModelException,
        TrivialTheoryException
    ],
    "budget": [
        BudgetExceededException
    ],
    "internal": [
        InvariantViolationException
    ]
}


def categorize_exception(e: Exception) -> str:
    """
    Classify an exception

    Args:
        e: the exception

    Returns:
        str: category name, "unknown" if not ours
    """
    for category, exception_types in EXCEPTION_CATEGORIES.items():
        if type(e) in exception_types:
            return category
    return "unknown"
