"""Exception hierarchy shared by the compiler, VM and debugger."""


class MiniLangError(Exception):
    """Base class for every error raised by this package."""


# --- front end -------------------------------------------------------------

class MiniSyntaxError(MiniLangError):
    def __init__(self, message, line, col=None):
        loc = f"line {line}" if col is None else f"line {line}, col {col}"
        super().__init__(f"{loc}: {message}")
        self.line = line
        self.col = col


class CompileError(MiniLangError):
    pass


class MissingMain(CompileError):
    pass


class UnknownIdentifier(CompileError):
    pass


class ArityMismatch(CompileError):
    pass


class DuplicateFunction(CompileError):
    pass


# --- bytecode / instrumentation -------------------------------------------

class UnknownSite(MiniLangError):
    pass


class AlreadyInstrumented(MiniLangError):
    pass


class EmptyScope(MiniLangError):
    pass


class VerifyError(MiniLangError):
    """Bytecode failed stack-balance verification."""


# --- runtime ---------------------------------------------------------------

class RuntimeFault(MiniLangError):
    """Target-program fault (type error, division by zero, null field access).

    Pauses the debug session instead of aborting the process.
    """

    def __init__(self, message, function=None, line=None):
        super().__init__(message)
        self.function = function
        self.line = line


# --- session / queries -----------------------------------------------------

class SessionError(MiniLangError):
    pass


class NotPaused(SessionError):
    pass


class SessionOver(SessionError):
    pass


class NoActiveQuery(SessionError):
    pass


class EmptyQuery(SessionError):
    pass


class InvalidRegex(SessionError):
    pass


class WorkloadFault(MiniLangError):
    """Benchmark workload violated a benchmark precondition."""
