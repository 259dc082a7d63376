"""Verification workbench for the spin-symmetric Coulomb problem."""

try:
    from ._core import *  # noqa: F401,F403
    from . import _core as core  # noqa: F401
except ImportError:  # in-tree builds put _core next to this package
    from _core import *  # noqa: F401,F403
    import _core as core  # noqa: F401
