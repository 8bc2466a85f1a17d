"""Ingestion module - synthetic dataset generation and video batching."""
