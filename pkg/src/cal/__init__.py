"""Distribution-constrained online classification: exact dimensions, learners, adversaries and a game engine."""

__version__ = "0.1.0"
