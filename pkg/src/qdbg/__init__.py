"""qdbg: interactive source-level debugger for OpenQASM 2.0 programs."""

__version__ = "0.1.0"
