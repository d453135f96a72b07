"""
Compressive single-pixel imaging simulation and ordering benchmark.
"""
__version__ = "0.1.0"
