"""Bayesian additive regression networks."""

from ._barn import *  # noqa: F401,F403
from ._barn import __doc__  # noqa: F401

__version__ = "0.1.0"
