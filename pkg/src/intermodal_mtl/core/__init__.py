"""Core module - configuration, logging, and error taxonomy."""
