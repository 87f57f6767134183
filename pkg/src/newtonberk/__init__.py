"""Exact Berkovich-line analysis of degenerating families of Newton maps."""
