"""Policy-evaluation toolkit: LSTD(lambda) with random projections,
exact model-based oracles and finite-sample bound calculators."""

from ._projlstd import *  # noqa: F401,F403
from ._projlstd import __doc__  # noqa: F401

__version__ = "0.1.0"
