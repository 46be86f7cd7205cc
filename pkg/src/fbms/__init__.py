"""Free boundary minimal surface stackings in the unit ball: constructions and numerical checks."""

from __future__ import annotations

__version__ = "0.1.0"
