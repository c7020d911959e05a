"""Array SAR 3D sparse imaging toolkit.

Thin wrapper over the C++ core: forward phase-history model, matched filter,
L1/MCP/PnP/RED-ADMM and RED-GAP solvers, denoisers, quality metrics, and the
experiment sweep harness.
"""

from ._sar3d import *  # noqa: F401,F403
from ._sar3d import __version__  # noqa: F401
