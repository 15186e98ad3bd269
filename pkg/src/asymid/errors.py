"""Exception hierarchy shared by the asymid modules."""

from __future__ import annotations


class AidError(Exception):
    """Base class for every error raised by asymid."""


class ModelError(AidError):
    """A model failed validation; carries the full diagnostic list."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        lines = [str(d) for d in self.diagnostics]
        super().__init__("\n".join(lines) if lines else "invalid model")


class IncompleteAssignment(AidError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__("unassigned label variables: " + ", ".join(self.missing))


class UnknownNode(AidError):
    pass


class NotAChanceVariable(AidError):
    pass


class NotADecision(AidError):
    pass


class KindMismatch(AidError):
    pass


class VariableNotInDomain(AidError):
    pass


class OrderContradiction(AidError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("order contradiction: " + " < ".join(self.cycle))


class NoUniqueInitialSplit(AidError):
    def __init__(self, candidates, prefix=()):
        self.candidates = sorted(candidates)
        self.prefix = tuple(prefix)
        where = ", ".join(f"{v}={s}" for v, s in self.prefix) or "root"
        super().__init__(
            f"no unique initial split variable at ({where}): candidates "
            + ", ".join(self.candidates)
        )


class NotInitialSplit(AidError):
    pass


class ImpossibleState(AidError):
    pass


class InadmissibleOrder(AidError):
    pass


class IllDefined(AidError):
    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__(f"model is not well defined: {verdict}")


class TreeTooLarge(AidError):
    pass
