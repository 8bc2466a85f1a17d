"""Tensor engine - dense 2-D arithmetic with reverse-mode differentiation."""
