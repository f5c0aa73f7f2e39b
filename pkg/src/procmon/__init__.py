"""Natural-language activity specification, planning, and execution monitoring."""

__version__ = "0.1.0"
