"""Genetic-algorithm wrapper gene selection with a three-layer perceptron classifier."""

__version__ = "0.1.0"
