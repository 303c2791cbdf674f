"""Static figures from rmsim result files.

This package reads only the documented CSV/JSON schemas of the simulator's
output and renders matplotlib PNGs; it computes no statistics of its own.
"""

from .figures import FigureSpec, render
from .schemas import EmptyInput, SchemaMismatch

__version__ = "0.1.0"

__all__ = ["FigureSpec", "render", "EmptyInput", "SchemaMismatch"]
