"""Renders viscowave CSV artifacts into figures."""

__version__ = "0.1.0"

from .csvio import RenderError
from .figures import KINDS, FigureSpec, render
