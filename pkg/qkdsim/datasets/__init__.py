"""
Datasets module
"""
from . import scenarios
