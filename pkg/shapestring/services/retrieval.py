"""
Shape index, top-k retrieval and bulls-eye evaluation.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.base import clone

from ..exceptions import (
    DuplicateId, EmptyIndex, FingerprintMismatch, FormatError, InvalidIndex, UnlabeledRecord,
)
from ..utils.io_utils import atomic_write_json, read_json
from .alignment import ScoreTable, similarity
from .contour import Contour
from .encoding import ShapeEncoder, SymbolString
from .shape_context import ScConfig, align_pair

logger = logging.getLogger(__name__)

INDEX_VERSION = 1

# Records scored per scheduling round when the prefilter is on
BATCH_SIZE = 64


@dataclass(frozen=True, eq=False)
class ShapeRecord:
    id: str
    label: Optional[str]
    symbols: SymbolString
    fingerprint: str
    points: Optional[np.ndarray] = None

    def contour(self) -> Contour:
        if self.points is None:
            raise InvalidIndex(f"Record {self.id} carries no contour")
        return Contour.from_points(self.points)

    def to_dict(self) -> dict:
        row = {'id': self.id, 'label': self.label, 'tokens': self.symbols.names()}
        if self.points is not None:
            row['points'] = np.asarray(self.points).tolist()
        return row


@dataclass
class ShapeIndex:
    fingerprint: str
    settings: Dict[str, str] = field(default_factory=dict)
    records: List[ShapeRecord] = field(default_factory=list)
    version: int = INDEX_VERSION

    def __len__(self) -> int:
        return len(self.records)

    def ids(self) -> List[str]:
        return [r.id for r in self.records]

    def get(self, record_id: str) -> ShapeRecord:
        for record in self.records:
            if record.id == record_id:
                return record
        raise KeyError(record_id)

    def class_sizes(self) -> Dict[str, int]:
        return dict(Counter(r.label for r in self.records))

    def to_dict(self) -> dict:
        return {
            'version': self.version,
            'fingerprint': self.fingerprint,
            'settings': dict(self.settings),
            'records': [r.to_dict() for r in self.records],
        }


def index_add(index: ShapeIndex, record: ShapeRecord) -> ShapeIndex:
    """
    Append a record

    Raises:
        FingerprintMismatch: record encoded under other settings
        DuplicateId: id already present
    """
    if record.fingerprint != index.fingerprint:
        raise FingerprintMismatch(
            f"Record {record.id} has fingerprint {record.fingerprint}, index uses {index.fingerprint}"
        )
    if any(r.id == record.id for r in index.records):
        raise DuplicateId(f"Record id already in index: {record.id}")
    index.records.append(record)
    return index


def build_index(items: Iterable[Tuple[str, Optional[str], Contour]], encoder: ShapeEncoder,
                fingerprint: str, settings: Optional[Dict[str, str]] = None) -> ShapeIndex:
    """Encode (id, label, contour) items into a fresh index"""
    index = ShapeIndex(fingerprint=fingerprint, settings=dict(settings or {}))
    for record_id, label, contour in items:
        record = ShapeRecord(
            id=record_id,
            label=label,
            symbols=encoder.encode(contour),
            fingerprint=fingerprint,
            points=np.array(contour.points),
        )
        index_add(index, record)
    logger.debug(f"Built index of {len(index)} records")
    return index


@dataclass(frozen=True)
class QueryHit:
    id: str
    label: Optional[str]
    similarity: float


@dataclass(frozen=True)
class QueryResult:
    hits: Tuple[QueryHit, ...]

    def __len__(self) -> int:
        return len(self.hits)

    def __getitem__(self, item) -> QueryHit:
        return self.hits[item]

    def ids(self) -> List[str]:
        return [h.id for h in self.hits]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [(rank, h.id, h.label if h.label is not None else '', h.similarity)
             for rank, h in enumerate(self.hits, 1)],
            columns=['rank', 'id', 'label', 'similarity'],
        )


def _sort_key(hit: QueryHit):
    return -hit.similarity, hit.id


def _score_records(query: SymbolString, records: Sequence[ShapeRecord], table: ScoreTable,
                   n_jobs: int) -> List[float]:
    if n_jobs == 1 or len(records) < 2:
        return [similarity(query, r.symbols, table) for r in records]
    return Parallel(n_jobs=n_jobs)(delayed(similarity)(query, r.symbols, table) for r in records)


def _length_bound(m: int, n: int) -> float:
    if m == 0 and n == 0:
        return 1.0
    if m == 0 or n == 0:
        return 0.0
    return min(m, n) / max(m, n)


def _prefilter_safe(table: ScoreTable) -> bool:
    # the length bound assumes no column scores above a match and gaps never help
    return table.gap <= 0 and table.match_score >= max(1.0, table.mismatch)


def query_topk(index: ShapeIndex, query: SymbolString, k: int, table: ScoreTable = ScoreTable(),
               prefilter: bool = True, n_jobs: int = 1) -> QueryResult:
    """
    The k records most similar to the query

    Args:
        index: Shape index
        query: Encoded query
        k: Number of hits (at least 1)
        table: Substitution and gap scores
        prefilter: Skip records whose length bound is below the current k-th score
        n_jobs: joblib workers for record scoring

    Returns:
        Hits by descending similarity, ties by id
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(index) == 0:
        raise EmptyIndex("Cannot query an empty index")

    records = index.records
    if not (prefilter and _prefilter_safe(table)):
        scores = _score_records(query, records, table, n_jobs)
        hits = [QueryHit(r.id, r.label, s) for r, s in zip(records, scores)]
        return QueryResult(tuple(sorted(hits, key=_sort_key)[:k]))

    m = len(query)
    bounds = [_length_bound(m, len(r.symbols)) for r in records]
    order = sorted(range(len(records)), key=lambda i: (-bounds[i], records[i].id))

    hits: List[QueryHit] = []
    skipped = 0
    pos = 0
    batch = max(BATCH_SIZE, k) * max(1, n_jobs)
    while pos < len(order):
        if len(hits) >= k:
            kth = sorted(hits, key=_sort_key)[k - 1].similarity
            if bounds[order[pos]] < kth:
                skipped = len(order) - pos
                break
        chunk = [records[i] for i in order[pos:pos + batch]]
        scores = _score_records(query, chunk, table, n_jobs)
        hits.extend(QueryHit(r.id, r.label, s) for r, s in zip(chunk, scores))
        pos += len(chunk)

    if skipped:
        logger.debug(f"Length prefilter skipped {skipped} of {len(records)} records")
    return QueryResult(tuple(sorted(hits, key=_sort_key)[:k]))


def query_pairwise(index: ShapeIndex, contour: Contour, k: int, encoder: ShapeEncoder,
                   sc_cfg: ScConfig = ScConfig(), table: ScoreTable = ScoreTable()) -> QueryResult:
    """
    Rank records by aligning the query onto each record before encoding both

    Slower than ``query_topk`` since every pair is encoded afresh.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(index) == 0:
        raise EmptyIndex("Cannot query an empty index")

    query = encoder.prepare(contour, canonical=False)
    hits = []
    for record in index.records:
        target = encoder.prepare(record.contour(), canonical=False)
        trace = align_pair(target, query, sc_cfg)
        score = similarity(encoder.encode_prepared(trace.aligned), encoder.encode_prepared(target), table)
        hits.append(QueryHit(record.id, record.label, score))
    return QueryResult(tuple(sorted(hits, key=_sort_key)[:k]))


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    score: float
    depth: int
    class_size: int
    per_query: pd.DataFrame

    def summary(self) -> str:
        return (f"bullseye={self.score:.6f} depth={self.depth} class_size={self.class_size} "
                f"queries={len(self.per_query)}")


def _check_labels(index: ShapeIndex) -> int:
    if len(index) == 0:
        raise EmptyIndex("Cannot evaluate an empty index")
    unlabeled = [r.id for r in index.records if r.label is None]
    if unlabeled:
        raise UnlabeledRecord(f"Records without a class label: {', '.join(unlabeled[:5])}")
    sizes = set(index.class_sizes().values())
    if len(sizes) != 1:
        raise InvalidIndex(f"Classes must be the same size, found sizes {sorted(sizes)}")
    return sizes.pop()


def evaluate(index: ShapeIndex, depth: Optional[int] = None, table: ScoreTable = ScoreTable(),
             prefilter: bool = True, n_jobs: int = 1) -> EvaluationReport:
    """
    Bulls-eye evaluation: every record queries the index, itself included

    Args:
        index: Labeled index with equal class sizes c
        depth: Retrieval depth, 2c by default

    Returns:
        Report with the score (hits / (records * c)) and per-query rows
    """
    class_size = _check_labels(index)
    depth = depth or 2 * class_size

    rows = []
    total_hits = 0
    for record in index.records:
        result = query_topk(index, record.symbols, depth, table, prefilter, n_jobs)
        ranks = [rank for rank, hit in enumerate(result.hits, 1) if hit.label == record.label]
        total_hits += len(ranks)
        rows.append({
            'query': record.id,
            'label': record.label,
            'hits': len(ranks),
            'ranks': ','.join(str(r) for r in ranks),
        })

    score = total_hits / (len(index) * class_size)
    frame = pd.DataFrame(rows, columns=['query', 'label', 'hits', 'ranks'])
    logger.debug(f"Bulls-eye {score:.4f} over {len(index)} queries at depth {depth}")
    return EvaluationReport(score=score, depth=depth, class_size=class_size, per_query=frame)


def bullseye(index: ShapeIndex, retrieve_depth: Optional[int] = None, table: ScoreTable = ScoreTable(),
             n_jobs: int = 1) -> float:
    return evaluate(index, retrieve_depth, table, n_jobs=n_jobs).score


def items_from_index(index: ShapeIndex) -> List[Tuple[str, Optional[str], Contour]]:
    return [(r.id, r.label, r.contour()) for r in index.records]


def angle_bin_sweep(items: Sequence[Tuple[str, Optional[str], Contour]], encoder: ShapeEncoder,
                    angle_bins: Iterable[int], depth: Optional[int] = None,
                    table: ScoreTable = ScoreTable(), n_jobs: int = 1) -> pd.DataFrame:
    """
    Bulls-eye score of the same labeled contours encoded with each angle bin count

    Returns:
        One row per K with columns angle_bins and bullseye
    """
    rows = []
    for bins in angle_bins:
        variant = clone(encoder).set_params(q_angle_bins=int(bins))
        index = build_index(items, variant, fingerprint=f'sweep-K{bins}')
        report = evaluate(index, depth, table, n_jobs=n_jobs)
        logger.info(f"Angle bins {bins}: bulls-eye {report.score:.4f}")
        rows.append({'angle_bins': int(bins), 'bullseye': report.score})
    return pd.DataFrame(rows, columns=['angle_bins', 'bullseye'])


def save_index(index: ShapeIndex, path: Union[str, Path]) -> Path:
    return atomic_write_json(path, index.to_dict())


def load_index(path: Union[str, Path]) -> ShapeIndex:
    """Read a versioned index document"""
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: index must be a JSON object")
    if doc.get('version') != INDEX_VERSION:
        raise InvalidIndex(f"{path}: unsupported index version {doc.get('version')!r}")
    try:
        fingerprint = str(doc['fingerprint'])
        raw_records = doc['records']
    except KeyError as e:
        raise FormatError(f"{path}: index is missing {e}") from e

    index = ShapeIndex(fingerprint=fingerprint, settings=dict(doc.get('settings') or {}))
    for row in raw_records:
        try:
            points = row.get('points')
            record = ShapeRecord(
                id=str(row['id']),
                label=row.get('label'),
                symbols=SymbolString.parse(' '.join(row['tokens'])),
                fingerprint=fingerprint,
                points=np.asarray(points, dtype=float) if points is not None else None,
            )
        except (KeyError, TypeError) as e:
            raise FormatError(f"{path}: malformed record {row!r:.80}") from e
        try:
            index_add(index, record)
        except DuplicateId as e:
            raise InvalidIndex(f"{path}: {e}") from e
    return index
