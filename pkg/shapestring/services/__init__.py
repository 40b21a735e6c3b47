from .contour import Contour, BinaryMask, trace_boundary, resample, normalize
from .encoding import ShapeEncoder, SymbolString, Token, encode_shape
from .alignment import ScoreTable, nw_fill, traceback, similarity
from .retrieval import ShapeIndex, ShapeRecord, query_topk, bullseye
from .shape_pipeline import ShapeEncodingPipeline

__all__ = [
    'Contour',
    'BinaryMask',
    'trace_boundary',
    'resample',
    'normalize',
    'ShapeEncoder',
    'SymbolString',
    'Token',
    'encode_shape',
    'ScoreTable',
    'nw_fill',
    'traceback',
    'similarity',
    'ShapeIndex',
    'ShapeRecord',
    'query_topk',
    'bullseye',
    'ShapeEncodingPipeline',
]
