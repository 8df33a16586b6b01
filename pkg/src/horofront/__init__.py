"""Word metrics, Banach metrics and finite-radius metric-functional boundaries
of concrete finitely generated groups, in exact integer arithmetic."""

__version__ = "0.1.0"
