"""Barrier-label stock classifier and fee-aware backtest pipeline."""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
except ImportError:
    from _core import *  # noqa: F401,F403  (in-tree build with PYTHONPATH)
