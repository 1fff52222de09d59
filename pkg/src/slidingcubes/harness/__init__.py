"""Generators, oracle, accounting, suite runner and command line."""
