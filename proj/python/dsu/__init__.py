"""Discrete speech unit tokenization, metrics and leaderboards."""

from ._dsu import *  # noqa: F401,F403
from ._dsu import DsuError

__version__ = "0.3.0"
