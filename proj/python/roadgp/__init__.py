"""Decentralized robust random-feature GP regression (C++ core)."""

from ._roadgp import *  # noqa: F401,F403
from ._roadgp import __doc__  # noqa: F401
