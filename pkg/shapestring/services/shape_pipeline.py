import logging
import time
from collections import Counter
from datetime import datetime
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from ..exceptions import FingerprintMismatch, ShapeStringError
from ..utils.config import RunConfig, get_config
from ..utils.logger import create_performance_logger, get_structured_logger
from .alignment import similarity
from .contour import Contour
from .encoding import ShapeEncoder
from .retrieval import (
    ShapeIndex, ShapeRecord, evaluate, index_add, query_pairwise, query_topk,
)
from .shape_context import align_pair


class ShapeEncodingPipeline:
    """Encoding, matching and retrieval driven by one RunConfig"""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or get_config()
        self.encoder = ShapeEncoder.from_config(self.config)
        self.sc_config = self.config.sc_config()
        self.score_table = self.config.score_table()
        self.fingerprint = self.config.fingerprint()
        self.logger = logging.getLogger(__name__)
        self.timed = create_performance_logger(self.logger)
        self.events = get_structured_logger('pipeline', __name__)

    def encode_single(self, item_id: str, contour: Contour, label: Optional[str] = None) -> Dict:
        """
        Encode one contour

        Args:
            item_id: Identifier carried into the result
            contour: Input contour, any pose
            label: Optional class label

        Returns:
            Result dictionary; ``record`` holds the ShapeRecord on success
        """
        start_time = time.time()
        try:
            symbols = self.encoder.encode(contour)
            record = ShapeRecord(
                id=item_id,
                label=label,
                symbols=symbols,
                fingerprint=self.fingerprint,
                points=np.array(contour.points),
            )
            return {
                'id': item_id,
                'label': label,
                'record': record,
                'symbols': str(symbols),
                'section_count': len(symbols) // 5,
                'processing_time': time.time() - start_time,
                'success': True,
            }
        except ShapeStringError as e:
            self.events.warning(f"Encoding {item_id} failed: {e}", item_id=item_id, error_type=type(e).__name__)
            return {
                'id': item_id,
                'label': label,
                'error': str(e),
                'error_type': type(e).__name__,
                'processing_time': time.time() - start_time,
                'success': False,
            }

    def encode_batch(self, items: Iterable[Tuple[str, Optional[str], Contour]]) -> Dict:
        """
        Encode many labeled contours; failures are logged and reported, not raised

        Returns:
            Dictionary with per-item results, records, statistics and errors
        """
        start_time = time.time()
        items = list(items)
        if not items:
            return {
                'results': [],
                'records': [],
                'statistics': {},
                'processing_time': 0,
                'success': False,
                'error': 'No shapes provided',
            }

        results = []
        errors = []
        for i, (item_id, label, contour) in enumerate(items):
            self.logger.debug(f"Encoding shape {i + 1}/{len(items)}: {item_id}")
            result = self.encode_single(item_id, contour, label)
            results.append(result)
            if not result['success']:
                errors.append(f"{item_id}: {result['error']}")

        records = [r['record'] for r in results if r['success']]
        return {
            'results': results,
            'records': records,
            'statistics': self._generate_statistics(results),
            'errors': errors,
            'total_shapes': len(items),
            'successful_shapes': len(records),
            'processing_time': time.time() - start_time,
            'success': len(errors) < len(items),
        }

    def build_index(self, items: Iterable[Tuple[str, Optional[str], Contour]],
                    index: Optional[ShapeIndex] = None) -> Tuple[ShapeIndex, Dict]:
        """Encode items and add the successful ones to ``index`` (a new one by default)"""
        if index is None:
            index = ShapeIndex(fingerprint=self.fingerprint, settings=self.config.encoding_settings())
        elif index.fingerprint != self.fingerprint:
            raise FingerprintMismatch(
                f"Index fingerprint {index.fingerprint} does not match configuration {self.fingerprint}"
            )

        with self.timed('index_build', {'index_size': len(index)}):
            batch = self.encode_batch(items)
            for record in batch['records']:
                index_add(index, record)
        batch['index_info'] = {
            'fingerprint': index.fingerprint,
            'records': len(index),
            'build_timestamp': datetime.now().isoformat(),
        }
        self.events.info(
            f"Index holds {len(index)} records",
            records=len(index),
            failures=batch['total_shapes'] - batch['successful_shapes'],
        )
        return index, batch

    def match(self, a: Contour, b: Contour) -> Dict:
        """
        End-to-end similarity of two contours

        b is pose-aligned onto a with shape contexts, then both are encoded
        in a's frame and aligned as token strings.
        """
        start_time = time.time()
        try:
            target = self.encoder.prepare(a, canonical=False)
            source = self.encoder.prepare(b, canonical=False)
            trace = align_pair(target, source, self.sc_config)
            symbols_a = self.encoder.encode_prepared(target)
            symbols_b = self.encoder.encode_prepared(trace.aligned)
            return {
                'similarity': similarity(symbols_a, symbols_b, self.score_table),
                'symbols_a': str(symbols_a),
                'symbols_b': str(symbols_b),
                'alignment': trace.to_dict(),
                'processing_time': time.time() - start_time,
                'success': True,
            }
        except ShapeStringError as e:
            self.events.error("Matching failed", error=e)
            return {
                'error': str(e),
                'error_type': type(e).__name__,
                'processing_time': time.time() - start_time,
                'success': False,
            }

    def query(self, index: ShapeIndex, contour: Contour, k: int) -> Dict:
        """Top-k query in the configured pose mode"""
        start_time = time.time()
        if index.fingerprint != self.fingerprint:
            raise FingerprintMismatch(
                f"Index fingerprint {index.fingerprint} does not match configuration {self.fingerprint}"
            )

        if self.config.get('pose_mode') == 'pairwise':
            result = query_pairwise(index, contour, k, self.encoder, self.sc_config, self.score_table)
        else:
            result = query_topk(
                index,
                self.encoder.encode(contour),
                k,
                self.score_table,
                prefilter=self.config.get('retrieval_prefilter'),
                n_jobs=self.config.get('n_jobs'),
            )
        return {
            'result': result,
            'pose_mode': self.config.get('pose_mode'),
            'processing_time': time.time() - start_time,
            'success': True,
        }

    def evaluate(self, index: ShapeIndex, depth: Optional[int] = None):
        with self.timed('bullseye', {'index_size': len(index)}):
            return evaluate(
                index,
                depth,
                self.score_table,
                prefilter=self.config.get('retrieval_prefilter'),
                n_jobs=self.config.get('n_jobs'),
            )

    def _generate_statistics(self, results: List[Dict]) -> Dict:
        """
        Summary of a batch of encoding results

        Args:
            results: Per-item result dictionaries

        Returns:
            Statistics dictionary
        """
        if not results:
            return {}

        successful = [r for r in results if r.get('success', False)]
        section_counts = [r['section_count'] for r in successful]
        error_types = Counter(r.get('error_type', 'unknown') for r in results if not r.get('success', False))

        return {
            'encoded': len(successful),
            'failed': len(results) - len(successful),
            'failure_types': dict(error_types),
            'mean_sections': float(np.mean(section_counts)) if section_counts else 0.0,
            'max_sections': max(section_counts) if section_counts else 0,
            'label_counts': dict(Counter(r['label'] for r in successful if r.get('label') is not None)),
            'mean_processing_time': float(np.mean([r['processing_time'] for r in results])),
        }
