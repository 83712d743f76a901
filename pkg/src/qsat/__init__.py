"""Qualitative sample-size decision support: data, learners, stacking,
conformal intervals, persistence, service, and CLI."""

__version__ = "0.1.0"
