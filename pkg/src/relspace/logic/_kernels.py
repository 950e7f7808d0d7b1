"""Picks the compiled search kernel when available.

Set ``RELSPACE_PURE=1`` to force the pure-Python kernel.
"""
import os

from . import _search_py

if os.environ.get("RELSPACE_PURE", "") not in ("", "0"):
    enumerate_models = _search_py.enumerate_models
    BACKEND = "python"
else:
    try:
        from ._csearch import enumerate_models
        BACKEND = "cython"
    except ImportError:  # extension not built
        enumerate_models = _search_py.enumerate_models
        BACKEND = "python"

pure_enumerate_models = _search_py.enumerate_models
