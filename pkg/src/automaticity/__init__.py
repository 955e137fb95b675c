"""Automaticity of integer sets in base q: residual censuses, bounded automata, analytic bounds."""

__version__ = "0.1.0"
