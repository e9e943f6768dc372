"""Ambiguity benchmark generation, clarification, and image-faithfulness evaluation."""

__version__ = "0.1.0"
