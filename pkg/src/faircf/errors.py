"""Exception hierarchy shared by every faircf module."""


class FairCFError(Exception):
    """Base class for all errors raised by faircf."""


class ConfigError(FairCFError, ValueError):
    pass


class DimensionMismatch(FairCFError, ValueError):
    pass


class EmptyDataset(FairCFError, ValueError):
    pass


class TooFewSamples(FairCFError, ValueError):
    pass


class SingleClassData(FairCFError, ValueError):
    pass


class MissingColumn(FairCFError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class NonNumericCell(FairCFError, ValueError):
    pass


class NonBinaryLabel(FairCFError, ValueError):
    pass


class NonFiniteObjective(FairCFError, ArithmeticError):
    pass


class NoValidCandidate(FairCFError, LookupError):
    pass


class EmptyPool(FairCFError, ValueError):
    pass
