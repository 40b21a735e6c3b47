"""
shapestring

Shape recognition by symbolic contour encoding: shape-context alignment,
angular-radial partitioning, inflexion-based section quantization and
Needleman-Wunsch alignment of the resulting symbol strings.
"""

__version__ = "1.0.0"
__author__ = "shapestring developers"
