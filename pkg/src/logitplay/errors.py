"""Exception hierarchy shared by every module."""


class LogitPlayError(Exception):
    pass


class InvalidInputError(LogitPlayError, ValueError):
    pass


class NumericError(LogitPlayError, ArithmeticError):
    pass


class UnsupportedScheduleError(LogitPlayError, ValueError):
    pass


class ConfigurationError(LogitPlayError, ValueError):
    pass


class ParseError(LogitPlayError, ValueError):
    def __init__(self, message, row=None, column=None):
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)
        self.row = row
        self.column = column


class NonConvergenceError(LogitPlayError, RuntimeError):
    """Raised when an iterative solver exhausts its budget.

    The best point found so far is attached as ``best``.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
