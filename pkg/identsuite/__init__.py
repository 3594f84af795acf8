"""
identsuite: closed-loop dynamic parameter identification laboratory
"""
__version__ = "0.3.0"
