"""Exception hierarchy shared across the solver modules."""


class StefanLabError(Exception):
    """Base class for all stefanlab errors."""


# --- expression language ---

class ExprError(StefanLabError):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, offset, expected, message=None):
        self.offset = offset
        self.expected = tuple(expected)
        msg = message or "syntax error at offset %d, expected one of %s" % (
            offset, ", ".join(self.expected))
        super().__init__(msg)


class UnknownIdentifier(ExprError):
    def __init__(self, name, offset=None):
        self.name = name
        self.offset = offset
        super().__init__("unknown identifier %r" % name)


class UnboundParameter(ExprError):
    def __init__(self, name):
        self.name = name
        super().__init__("parameter %r has no bound value" % name)


class EvalDomainError(ExprError):
    def __init__(self, node, value):
        self.node = node
        self.value = value
        super().__init__("domain error evaluating %r at value %r" % (node, value))


# --- time stepping ---

class StepSizeTooLarge(StefanLabError):
    pass


class SolverSingular(StefanLabError):
    pass


class FrontRetreat(StefanLabError):
    pass


class NoConvergence(StefanLabError):
    def __init__(self, iterations, residual, message=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message or "no convergence after %d iterations (residual %.3e)"
                         % (iterations, residual))


class NonPositiveIterate(StefanLabError):
    pass


class NonPositive(StefanLabError):
    pass


class DomainNotLargeEnough(StefanLabError):
    pass


class TruncationTooSmall(StefanLabError):
    pass


# --- root finding / thresholds ---

class BracketInvalid(StefanLabError):
    pass


class NoSignChange(StefanLabError):
    def __init__(self, sign, message=None):
        self.sign = sign
        super().__init__(message or "eigenvalue keeps sign %+d over the whole scan" % sign)


class TooManyUndecided(StefanLabError):
    pass


class BoundViolated(StefanLabError):
    pass


class HypothesisHFailed(StefanLabError):
    pass


class NotSpreading(StefanLabError):
    pass


# --- configuration ---

class ConfigError(StefanLabError):
    pass


class MissingKey(ConfigError):
    def __init__(self, key):
        self.key = key
        super().__init__("missing required key %r" % key)


class UnknownKey(ConfigError):
    def __init__(self, key):
        self.key = key
        super().__init__("unknown key %r" % key)


class TypeMismatch(ConfigError):
    def __init__(self, key, expected, value):
        self.key = key
        self.expected = expected
        self.value = value
        super().__init__("key %r: expected %s, got %r" % (key, expected, value))


class ExpressionError(ConfigError):
    def __init__(self, key, cause):
        self.key = key
        self.cause = cause
        self.offset = getattr(cause, "offset", None)
        super().__init__("key %r: %s" % (key, cause))
