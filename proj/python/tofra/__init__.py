"""Flow-rate allocation and slot-level simulation for random-access wireless
multihop networks.

The heavy lifting lives in the compiled extension; everything it exports is
re-exported here.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

__version__ = "0.1.0"
