"""Tunable-coupler CZ gate simulation and analysis."""

try:
    from czsim._czsim import *  # noqa: F401,F403
    from czsim._czsim import __version__  # noqa: F401
except ImportError:
    # In-tree builds put the extension next to this package on sys.path.
    from _czsim import *  # noqa: F401,F403
    from _czsim import __version__  # noqa: F401
