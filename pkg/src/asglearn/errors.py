"""Exception hierarchy shared across the toolkit."""


class AsgLearnError(Exception):
    pass


class GrammarSyntaxError(AsgLearnError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UndefinedNonterminal(GrammarSyntaxError):
    pass


class EmptyGrammar(GrammarSyntaxError):
    pass


class AnnotationError(GrammarSyntaxError):
    """Malformed annotation: bad @k reference, unsafe variable, bad rule shape."""


class NonViablePrefix(AsgLearnError):
    pass


class NotInLanguage(AsgLearnError):
    pass


class AmbiguityCapExceeded(AsgLearnError):
    """The parse-forest (or chart) cap was hit before a verdict was reached."""


class EvaluationError(AsgLearnError):
    pass


class DeadEnd(AsgLearnError):
    pass


class EmptyMask(AsgLearnError):
    pass


class OracleFailure(AsgLearnError):
    pass


class InconsistentOracle(AsgLearnError):
    pass


class Unsatisfiable(AsgLearnError):
    def __init__(self, message: str, closest=None, covered: int = 0, total: int = 0):
        self.closest = closest
        self.covered = covered
        self.total = total
        super().__init__(message)


class ProviderError(AsgLearnError):
    pass


class ConfigError(AsgLearnError):
    pass
