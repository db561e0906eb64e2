"""MiniLang: a small stack-bytecode language with a debugger that searches
the values of string expressions in the running program."""

__version__ = "0.1.0"

from .frontend import SourceUnit, parse
from .compiler import compile_program, compile_source
from .instrument import ScopePattern, enumerate_sites, instrument
from .bytecode import ProgramImage, disassemble, assemble, site_lookup
from .session import DebugSession, Query, matches
from .vm import VM

__all__ = [
    "SourceUnit", "parse", "compile_program", "compile_source",
    "ScopePattern", "enumerate_sites", "instrument",
    "ProgramImage", "disassemble", "assemble", "site_lookup",
    "DebugSession", "Query", "matches", "VM",
]
