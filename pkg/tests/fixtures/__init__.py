"""Test fixtures initialization."""
