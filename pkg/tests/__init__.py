"""
Tests for the freemaps package.
"""
