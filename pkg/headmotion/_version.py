"""Single source of truth for the headmotion version.

Kept import-free so the build backend can read it statically (see the attr
directive in pyproject.toml) without importing numpy or pandas.
"""

__version__ = "0.3.0"
