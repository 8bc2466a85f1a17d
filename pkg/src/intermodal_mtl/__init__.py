"""Intermodal MTL - multi-task sentiment and emotion recognition over utterance sequences."""

__version__ = "0.1.0"
__author__ = "Intermodal MTL Team"
