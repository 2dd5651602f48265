"""Class-D amplifier simulation and behavioral modeling toolkit"""

__version__ = "1.0.0"
