"""Exception hierarchy shared by every module in the package."""


class PlaceEvalError(Exception):
    """Base class for all package errors."""


class InputError(PlaceEvalError):
    """Problems with user-supplied data or files (CLI exit code 1)."""


class MethodError(PlaceEvalError):
    """Problems raised by an estimation method itself (CLI exit code 2)."""


class ParseError(InputError):
    def __init__(self, row, col, message="unparseable cell"):
        self.row = row
        self.col = col
        super().__init__(f"{message} at row {row}, column {col!r}")


class ValidationError(InputError):
    def __init__(self, message, year=None, unit=None):
        self.year = year
        self.unit = unit
        if year is not None or unit is not None:
            message = f"{message} (year={year}, unit={unit!r})"
        super().__init__(message)


class DomainError(InputError):
    def __init__(self, year, unit, column, value):
        self.year = year
        self.unit = unit
        self.column = column
        self.value = value
        super().__init__(
            f"nonpositive value {value!r} for year={year}, unit={unit!r}, column={column!r}"
        )


class ArgumentError(MethodError, ValueError):
    """Invalid arguments to a numerical operation."""


class RankError(MethodError):
    """Design matrix does not have full column rank."""


class SelectionError(MethodError):
    """No admissible control group could be found."""
