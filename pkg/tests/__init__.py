"""Test package for dvs-forecast."""
