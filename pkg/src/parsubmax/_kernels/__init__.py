"""Compiled batch-selection kernels, optional at runtime.

When the extension cannot be imported (not built on this platform) or
PARSUBMAX_DISABLE_EXT is set in the environment, callers fall back to
the pure-python reference engine, which produces identical outputs on
the same seeds.
"""

import os

try:
    from . import _ext
    HAVE_EXT = True
except ImportError:
    _ext = None
    HAVE_EXT = False


def available():
    """True when the compiled engine may be dispatched to right now."""
    if not HAVE_EXT:
        return False
    return not os.environ.get("PARSUBMAX_DISABLE_EXT")
