"""Exception types and the CLI exit codes they map to."""

EXIT_OK = 0
EXIT_DATA_GAP = 2
EXIT_PARSE = 3
EXIT_DOMAIN = 4


class AssocTotientError(Exception):
    exit_code = 1


class DataGapError(AssocTotientError):
    """A prime needed by the computation is not covered by the eigenvalue data."""

    exit_code = EXIT_DATA_GAP

    def __init__(self, prime, coverage_bound=None):
        self.prime = prime
        self.coverage_bound = coverage_bound
        msg = f"no eigenvalue for prime p={prime}"
        if coverage_bound is not None:
            msg += f" (source covers primes <= {coverage_bound})"
        super().__init__(msg)


class SpecParseError(AssocTotientError, ValueError):
    exit_code = EXIT_PARSE


class EigenvalueFileError(AssocTotientError, ValueError):
    """Malformed, duplicated or out-of-bound entries in an eigenvalue table."""

    exit_code = EXIT_PARSE

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


class DomainError(AssocTotientError, ValueError):
    """Argument outside the operation's domain (checkpoint > X, n < 1, ...)."""

    exit_code = EXIT_DOMAIN


class MemoryCapError(DomainError):
    def __init__(self, required, cap):
        self.required = required
        self.cap = cap
        super().__init__(
            f"allocation of {required} bytes exceeds memory cap of {cap} bytes"
        )
