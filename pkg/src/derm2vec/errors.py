"""Exception hierarchy shared by every derm2vec module."""


class Derm2VecError(Exception):
    """Base class for all package errors."""


class ParseError(Derm2VecError, ValueError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class ShapeError(Derm2VecError, ValueError):
    pass


class SpecError(Derm2VecError, ValueError):
    pass


class NumericError(Derm2VecError, ArithmeticError):
    pass


class DivergenceError(NumericError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, learning_rate, stage=None):
        self.epoch = epoch
        self.learning_rate = learning_rate
        self.stage = stage
        where = f"[{stage}] " if stage else ""
        super().__init__(
            f"{where}loss became non-finite at epoch {epoch} "
            f"(learning_rate={learning_rate:g})"
        )

    def with_stage(self, stage):
        return DivergenceError(self.epoch, self.learning_rate, stage)


class LeakageError(Derm2VecError, AssertionError):
    """A validation row was about to reach a fit call."""


class FoldError(Derm2VecError):
    """A model failed while fitting or predicting one CV fold."""

    def __init__(self, fold, cause):
        self.fold = fold
        self.cause = cause
        super().__init__(f"fold {fold}: {type(cause).__name__}: {cause}")


class ConfigError(Derm2VecError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
