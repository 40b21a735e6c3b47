"""Error hierarchy shared by every shapestring module."""


class ShapeStringError(Exception):
    """Base class for all errors raised by the library"""


class ConfigError(ShapeStringError):
    """Unknown configuration key or a value that cannot be coerced"""


class FormatError(ShapeStringError):
    """Malformed contour, mask, symbol or index file"""


class InvalidContour(ShapeStringError):
    """Point list that cannot form a closed contour"""


class EmptyMask(ShapeStringError):
    """Binary mask without a single foreground pixel"""


class DegenerateRegion(ShapeStringError):
    """Foreground region whose boundary has fewer than 3 pixels"""


class ZeroExtent(ShapeStringError):
    """Shape whose points all coincide"""


class DimensionMismatch(ShapeStringError):
    """Histograms with different bin counts"""


class DegenerateCorrespondence(ShapeStringError):
    """Correspondence whose source points are all coincident"""


class OutsideCircle(ShapeStringError):
    """Point lying outside the surrounding circle"""


class ZeroChord(ShapeStringError):
    """Curved section whose end points coincide"""


class InconsistentMatrix(ShapeStringError):
    """Score matrix that the given sequences could not have produced"""


class FingerprintMismatch(ShapeStringError):
    """Record encoded under a different configuration than the index"""


class DuplicateId(ShapeStringError):
    """Record id already present in the index"""


class EmptyIndex(ShapeStringError):
    """Query against an index without records"""


class UnlabeledRecord(ShapeStringError):
    """Evaluation over a record that carries no class label"""


class InvalidIndex(ShapeStringError):
    """Index that violates an evaluation precondition"""
