"""Symbol-selective full-duplex decode-and-forward relaying toolkit.

Link-level simulation of the source -> full-duplex relay -> destination
chain with square-deviation symbol selection at the relay and a
discard-aware joint MAP detector at the destination, together with the
closed-form outage expressions and the power/location optimizer built on
them.
"""
from ._accel import HAVE_NUMBA, USE_NUMBA

__all__ = ["HAVE_NUMBA", "USE_NUMBA"]
__version__ = "0.1.0"
