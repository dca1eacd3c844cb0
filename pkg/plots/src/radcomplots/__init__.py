"""Figure rendering for radcomopt experiment outputs."""

__version__ = "0.1.0"

from .figures import (FigureKind, FigureSpec, SchemaError, render,
                      render_beampattern, render_power_bars, render_tradeoff)
