"""
Test package for the single-pixel imaging benchmark.
"""
