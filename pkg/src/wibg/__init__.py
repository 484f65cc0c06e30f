"""Temporary minimal init for incremental testing."""
