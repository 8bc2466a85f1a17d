"""Processing module - encoders, attention, model, training and metrics."""
