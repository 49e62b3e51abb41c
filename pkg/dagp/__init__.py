"""
DAGP - Dimensionally-aware local search for symbolic regression
Rediscovers Feynman equations under unit constraints and analyses the
resulting fitness landscapes as Local Optima Networks
"""

__version__ = "1.0.0"
__author__ = "DAGP Team"
