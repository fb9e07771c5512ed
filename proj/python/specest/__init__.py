"""Bartlett/Welch spectral estimation with non-asymptotic error
certificates for L-mixing data."""

try:
    from ._specest import *  # noqa: F401,F403  (installed wheel layout)
    from . import _specest as _core
except ImportError:  # in-tree build: extension directly on sys.path
    from _specest import *  # noqa: F401,F403
    import _specest as _core

__all__ = [name for name in dir(_core) if not name.startswith("_")]
__version__ = "0.1.0"
