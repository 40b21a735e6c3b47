import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd
from PIL import Image, UnidentifiedImageError

from ..exceptions import FormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

# Gray level at or above which a PGM pixel is foreground
MASK_THRESHOLD = 128


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """
    Write a file through a temporary sibling and a rename

    Args:
        path: Destination file
        data: Full file content

    Returns:
        Destination path
    """
    path = Path(path)
    directory = path.parent if str(path.parent) else Path('.')
    directory.mkdir(parents=True, exist_ok=True)

    fd, tmp_name = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug(f"Wrote {len(data)} bytes to {path}")
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


def atomic_write_json(path: PathLike, data: Any) -> Path:
    return atomic_write_text(path, json.dumps(data, indent=2) + '\n')


def atomic_write_tsv(path: PathLike, frame: pd.DataFrame) -> Path:
    return atomic_write_text(path, frame.to_csv(sep='\t', index=False))


def read_json(path: PathLike) -> Any:
    """Parse a JSON file, reporting syntax errors as FormatError"""
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            return json.load(handle)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON ({e})") from e


def contour_to_document(points: np.ndarray) -> Dict[str, Any]:
    return {'points': np.asarray(points, dtype=float).tolist(), 'closed': True}


def save_contour(path: PathLike, contour) -> Path:
    return atomic_write_json(path, contour_to_document(contour.points))


def load_contour(path: PathLike):
    """Contour from a ``{"points": [[x, y], ...], "closed": true}`` document"""
    from ..services.contour import Contour

    doc = read_json(path)
    if not isinstance(doc, dict) or 'points' not in doc:
        raise FormatError(f"{path}: a contour document needs a 'points' list")
    if doc.get('closed', True) is not True:
        raise FormatError(f"{path}: only closed contours are supported")
    return Contour.from_points(doc['points'])


def _mask_from_json(doc: Dict[str, Any], path: PathLike):
    from ..services.contour import BinaryMask

    try:
        width = int(doc['width'])
        height = int(doc['height'])
        bits = np.asarray(doc['bits'], dtype=bool)
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"{path}: a mask document needs width, height and bits ({e})") from e
    if bits.size != width * height:
        raise FormatError(f"{path}: mask has {bits.size} bits, expected {width}x{height}")
    return BinaryMask.from_array(bits.reshape(height, width))


def load_mask(path: PathLike):
    """
    Binary mask from a PGM image (P2 or P5) or a JSON document

    PGM pixels at gray level 128 or more are foreground. The JSON form is
    ``{"width": W, "height": H, "bits": [...]}`` with bits either as H rows
    of W values or as one row-major list.
    """
    from ..services.contour import BinaryMask

    path = Path(path)
    if path.suffix.lower() == '.json':
        return _mask_from_json(read_json(path), path)
    try:
        with Image.open(path) as image:
            gray = np.asarray(image.convert('L'))
    except UnidentifiedImageError as e:
        raise FormatError(f"{path}: not a readable PGM image") from e
    return BinaryMask.from_array(gray >= MASK_THRESHOLD)


def load_shape(path: PathLike):
    """
    Contour from either a contour document or a mask

    Masks are traced with Moore-neighbour boundary tracing.
    """
    from ..services.contour import trace_boundary

    path = Path(path)
    if path.suffix.lower() == '.json':
        doc = read_json(path)
        if isinstance(doc, dict) and 'bits' in doc:
            return trace_boundary(_mask_from_json(doc, path))
        return load_contour(path)
    return trace_boundary(load_mask(path))


def read_symbols(path: PathLike):
    from ..services.encoding import SymbolString

    text = Path(path).read_text(encoding='utf-8')
    return SymbolString.parse(text)


def read_tokens(path: PathLike):
    """Token sequence without the quintuple check, for aligning arbitrary strings"""
    from ..services.encoding import as_tokens

    return as_tokens(Path(path).read_text(encoding='utf-8'))


def write_symbols(path: PathLike, symbols) -> Path:
    return atomic_write_text(path, f"{symbols}\n")
