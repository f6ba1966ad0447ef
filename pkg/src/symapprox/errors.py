"""Exception hierarchy shared by all solvers."""


class SymApproxError(Exception):
    """Base class for every error raised by the package."""


# expression kernel
class ParseError(SymApproxError):
    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class SubstitutionIntoBoundVar(SymApproxError):
    pass


class RewriteBudgetExceeded(SymApproxError):
    pass


class NotPolynomialInSymbol(SymApproxError):
    pass


class EvaluationError(SymApproxError):
    pass


class UnboundSymbol(EvaluationError):
    pass


class DomainError(EvaluationError):
    pass


# calculus
class UnsupportedDerivative(SymApproxError):
    pass


class PoleAtCenter(SymApproxError):
    pass


class UnresolvedIntegral(SymApproxError):
    pass


# frechet
class NonlocalDependence(SymApproxError):
    pass


# iterate
class DegenerateSequence(SymApproxError):
    pass


# linear algebra / newton
class SingularSystem(SymApproxError):
    pass


class AmbiguousPivot(SymApproxError):
    pass


class LinearBackendUnsupported(SymApproxError):
    pass


# perturb
class NotRegular(SymApproxError):
    pass


class DegenerateRoot(SymApproxError):
    pass


class SingularPade(SymApproxError):
    pass


# galerkin
class UnresolvedInnerProduct(SymApproxError):
    pass


# numvalid
class NoConvergence(SymApproxError):
    pass
