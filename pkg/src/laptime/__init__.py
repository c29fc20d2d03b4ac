"""Minimum-lap-time design and control toolkit.

A numpy/scipy library built around a 14-DOF Lagrangian chassis model with
Magic Formula tires, a curvilinear track description, trapezoidal direct
transcription, and an interior-point NLP solver.  See README.md for the tour.
"""

__version__ = "0.1.0"
