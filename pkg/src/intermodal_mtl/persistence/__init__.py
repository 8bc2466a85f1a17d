"""Persistence module - data records, dataset files, checkpoints and exports."""
