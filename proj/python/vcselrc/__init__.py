"""Simulated VCSEL-array reservoir computer."""

from ._vcselrc import (
    Config,
    TraceFormatError,
    __version__,
    evaluate,
    ingest,
    ridge_fit,
    sequence,
    simulate,
    sweep,
    target_dac,
    target_header,
    target_memory,
    target_xor,
    trivial_baseline,
)

__all__ = [
    "Config",
    "TraceFormatError",
    "evaluate",
    "ingest",
    "ridge_fit",
    "sequence",
    "simulate",
    "sweep",
    "target_dac",
    "target_header",
    "target_memory",
    "target_xor",
    "trivial_baseline",
]
