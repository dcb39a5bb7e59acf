"""Exception types.  Everything derives from ForgeError."""


class ForgeError(Exception):
    pass


class ExpressionError(ForgeError):
    def __init__(self, msg, text="", pos=0):
        self.text, self.pos = text, pos
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        self.line, self.col = line, col
        super().__init__(f"{msg} at line {line}, column {col}")


class UnknownIdentifierError(ForgeError):
    def __init__(self, name, suggestions=()):
        self.name, self.suggestions = name, list(suggestions)
        hint = f"; did you mean {self.suggestions[0]!r}?" if self.suggestions else ""
        super().__init__(f"unknown identifier {name!r}{hint}")


class ScenarioError(ForgeError):
    pass


class DomainError(ForgeError):
    """Requested domain touches a singular locus (horizon, kink, boundary)."""


class HorizonDomainError(DomainError):
    pass


class StencilDomainError(DomainError):
    pass


class ChiBoundaryError(StencilDomainError):
    pass


class KinkError(DomainError):
    pass


class DegenerateMetricError(ForgeError):
    pass


class PhiStarZeroError(DegenerateMetricError):
    pass


class QuadratureError(ForgeError):
    pass


class SolverError(ForgeError):
    pass


class RootError(ForgeError):
    pass


class ConstraintError(ForgeError):
    pass


class PolarizationError(ForgeError):
    pass


class LambdaZeroError(ForgeError):
    pass


class Eta5StarZeroError(DegenerateMetricError):
    pass
