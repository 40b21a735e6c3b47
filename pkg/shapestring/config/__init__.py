"""
Packaged default configuration for shapestring
"""

from pathlib import Path

DEFAULT_CONFIG_FILE = Path(__file__).parent / 'default.cfg'
