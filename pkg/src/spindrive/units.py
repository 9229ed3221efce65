"""Unit conventions.

All internal frequencies are angular (rad/us) and all times are in us.
External interfaces (CLI, CSV exports) use ordinary frequency in MHz;
the conversion lives in exactly this function pair.
"""

import math

TWO_PI = 2.0 * math.pi


def from_mhz(f_mhz: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * f_mhz


def to_mhz(omega: float) -> float:
    """Angular frequency in rad/us -> ordinary frequency in MHz."""
    return omega / TWO_PI
