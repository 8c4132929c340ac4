"""Exception hierarchy; the CLI maps these onto exit codes."""


class DecoBudgetError(Exception):
    exit_code = 1


class DomainError(DecoBudgetError, ValueError):
    """Argument outside the physical domain of an operation."""


class ConfigError(DecoBudgetError):
    exit_code = 1


class DataError(DecoBudgetError):
    exit_code = 2


class ParseError(DataError):
    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class UnitError(DataError):
    pass


class SupportError(DataError):
    pass


class QuadratureError(DecoBudgetError):
    exit_code = 3
