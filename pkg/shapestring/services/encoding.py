"""
Section quantization and symbol string assembly.

Every section becomes a quintuple of tokens (area, d1, d2, angle, degree).
Quintuples are concatenated in ascending sector ordinal, then run order,
then contour order.
"""

import logging
import math
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ..exceptions import FormatError
from .arp import ArpConfig, SectorId, SectorSlice, SurroundingCircle, partition_contour, surrounding_circle
from .contour import Contour, resample, to_clockwise
from .sections import Section, SectionConfig, SectionKind, make_sections
from .shape_context import canonical_pose

logger = logging.getLogger(__name__)


class TokenFamily(str, Enum):
    AREA = 'area'
    DIST1 = 'dist1'
    DIST2 = 'dist2'
    ANGLE = 'angle'
    DEGREE = 'degree'


FAMILY_ORDER = (TokenFamily.AREA, TokenFamily.DIST1, TokenFamily.DIST2, TokenFamily.ANGLE, TokenFamily.DEGREE)
GROUP_SIZE = len(FAMILY_ORDER)

_NAMED_TOKENS = {
    'S': (TokenFamily.AREA, 1), 'L': (TokenFamily.AREA, 2),
    'S1': (TokenFamily.DIST1, 1), 'M1': (TokenFamily.DIST1, 2), 'L1': (TokenFamily.DIST1, 3),
    'S2': (TokenFamily.DIST2, 1), 'M2': (TokenFamily.DIST2, 2), 'L2': (TokenFamily.DIST2, 3),
    'D1': (TokenFamily.DEGREE, 1), 'D2': (TokenFamily.DEGREE, 2),
}
_ANGLE_TOKEN = re.compile(r'^A([1-9][0-9]*)$')

AREA_NAMES = ('S', 'L')
DIST1_NAMES = ('S1', 'M1', 'L1')
DIST2_NAMES = ('S2', 'M2', 'L2')
DEGREE_NAMES = ('D1', 'D2')


@dataclass(frozen=True)
class Token:
    name: str
    family: TokenFamily
    rank: int

    @classmethod
    def parse(cls, name: str) -> 'Token':
        return _parse_token(name)

    def __str__(self) -> str:
        return self.name


@lru_cache(maxsize=None)
def _parse_token(name: str) -> Token:
    if name in _NAMED_TOKENS:
        family, rank = _NAMED_TOKENS[name]
        return Token(name, family, rank)
    match = _ANGLE_TOKEN.match(name)
    if match:
        return Token(name, TokenFamily.ANGLE, int(match.group(1)))
    raise FormatError(f"Unknown token: {name!r}")


TokenLike = Union[Token, str]


def as_tokens(seq: Union[str, Iterable[TokenLike]]) -> Tuple[Token, ...]:
    """Token tuple from a SymbolString, a token iterable or whitespace-separated text"""
    if isinstance(seq, str):
        seq = [part for part in seq.split() if part != '|']
    return tuple(t if isinstance(t, Token) else Token.parse(t) for t in seq)


@dataclass(frozen=True)
class SymbolString:
    """Token sequence made of whole quintuples in family order"""

    tokens: Tuple[Token, ...] = ()

    def __post_init__(self):
        if len(self.tokens) % GROUP_SIZE:
            raise FormatError(f"Symbol string length {len(self.tokens)} is not a multiple of {GROUP_SIZE}")
        for pos, token in enumerate(self.tokens):
            expected = FAMILY_ORDER[pos % GROUP_SIZE]
            if token.family is not expected:
                raise FormatError(f"Token {token.name} at position {pos} should be of family {expected.value}")

    @classmethod
    def parse(cls, text: str) -> 'SymbolString':
        return cls(as_tokens(text))

    @classmethod
    def from_quintuples(cls, groups: Iterable[Sequence[Token]]) -> 'SymbolString':
        return cls(tuple(t for group in groups for t in group))

    def quintuples(self) -> List[Tuple[Token, ...]]:
        return [self.tokens[i:i + GROUP_SIZE] for i in range(0, len(self.tokens), GROUP_SIZE)]

    def names(self) -> List[str]:
        return [t.name for t in self.tokens]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __getitem__(self, item):
        return self.tokens[item]

    def __str__(self) -> str:
        return ' | '.join(' '.join(t.name for t in group) for group in self.quintuples())


@dataclass(frozen=True)
class QuantizerConfig:
    area_threshold: float = 0.01
    dist_edges: Tuple[float, float] = (1.0 / 3.0, 2.0 / 3.0)
    angle_bins: int = 6
    degree_threshold: float = 0.25

    def __post_init__(self):
        edges = tuple(float(e) for e in self.dist_edges)
        object.__setattr__(self, 'dist_edges', edges)
        if self.area_threshold <= 0:
            raise ValueError("area_threshold must be positive")
        if len(edges) != 2 or not 0.0 < edges[0] < edges[1] < 1.0:
            raise ValueError("dist_edges must be two ascending values inside (0, 1)")
        if self.angle_bins < 2:
            raise ValueError("angle_bins must be at least 2")
        if self.degree_threshold <= 0:
            raise ValueError("degree_threshold must be positive")


def _dist_rank(d: float, edges: Tuple[float, float]) -> int:
    return 1 + sum(1 for e in edges if d >= e)


def quantize_section(s: Section, q: QuantizerConfig = QuantizerConfig()) -> Tuple[Token, ...]:
    """
    Five tokens of one section in family order

    Line sections always get S and D1.
    """
    is_line = s.kind is SectionKind.LINE
    area = 'S' if is_line or s.area < q.area_threshold else 'L'
    d1 = DIST1_NAMES[_dist_rank(s.d1, q.dist_edges) - 1]
    d2 = DIST2_NAMES[_dist_rank(s.d2, q.dist_edges) - 1]
    angle_rank = min(int(math.floor(s.alpha * q.angle_bins / math.pi)) + 1, q.angle_bins)
    degree = 'D1' if is_line or s.degree < q.degree_threshold else 'D2'
    return tuple(Token.parse(name) for name in (area, d1, d2, f'A{angle_rank}', degree))


@dataclass(frozen=True, eq=False)
class SectionRecord:
    sector: SectorId
    run: int
    section: Section
    tokens: Tuple[Token, ...]

    def to_dict(self) -> dict:
        row = {'sector': self.sector.ordinal, 'run': self.run}
        row.update(self.section.to_dict())
        row['tokens'] = [t.name for t in self.tokens]
        return row


@dataclass(frozen=True, eq=False)
class ShapeEncoding:
    """Intermediate results of one encoding, kept for dumps and plots"""

    contour: Contour
    circle: SurroundingCircle
    slices: Tuple[SectorSlice, ...]
    sections: Tuple[SectionRecord, ...]
    symbols: SymbolString

    def sector_rows(self) -> List[dict]:
        return [s.to_dict() for s in self.slices]

    def section_rows(self) -> List[dict]:
        return [r.to_dict() for r in self.sections]


def encode_details(contour: Contour, arp: ArpConfig = ArpConfig(), q: QuantizerConfig = QuantizerConfig(),
                   section_cfg: SectionConfig = SectionConfig()) -> ShapeEncoding:
    """
    Run circle, partition, sections and quantizer on a contour

    The contour is switched to clockwise traversal first.
    """
    contour = to_clockwise(contour)
    circle = surrounding_circle(contour, arp.circle_method)
    slices = partition_contour(contour, circle, arp)

    records = []
    for sector_slice in slices:
        for run_no, run in enumerate(sector_slice.runs):
            run_points = contour.points[list(run.indices)]
            for section in make_sections(run_points, circle, section_cfg, closed=run.closed):
                records.append(SectionRecord(sector_slice.sector, run_no, section, quantize_section(section, q)))

    symbols = SymbolString.from_quintuples(r.tokens for r in records)
    logger.debug(f"Encoded {len(contour)} points into {len(records)} sections")
    return ShapeEncoding(contour, circle, tuple(slices), tuple(records), symbols)


def encode_shape(contour: Contour, arp: ArpConfig = ArpConfig(), q: QuantizerConfig = QuantizerConfig(),
                 section_cfg: SectionConfig = SectionConfig()) -> SymbolString:
    return encode_details(contour, arp, q, section_cfg).symbols


class ShapeEncoder(BaseEstimator, TransformerMixin):
    """
    Contour to symbol string transformer

    Resamples every contour, moves it to its canonical pose (unless
    ``canonical`` is off) and encodes it. Stateless: ``fit`` only returns
    self, so the encoder can sit inside sklearn pipelines and grid searches.
    """

    def __init__(self, resample_n=200, canonical=True,
                 arp_radial_count=4, arp_angular_count=8, arp_start_angle=0.0, arp_circle='centroid',
                 section_window=5, section_eps_line=1e-6,
                 q_area_threshold=0.01, q_dist_edges=(1.0 / 3.0, 2.0 / 3.0), q_angle_bins=6,
                 q_degree_threshold=0.25):
        self.resample_n = resample_n
        self.canonical = canonical
        self.arp_radial_count = arp_radial_count
        self.arp_angular_count = arp_angular_count
        self.arp_start_angle = arp_start_angle
        self.arp_circle = arp_circle
        self.section_window = section_window
        self.section_eps_line = section_eps_line
        self.q_area_threshold = q_area_threshold
        self.q_dist_edges = q_dist_edges
        self.q_angle_bins = q_angle_bins
        self.q_degree_threshold = q_degree_threshold

    @classmethod
    def from_config(cls, config, **overrides) -> 'ShapeEncoder':
        """Build from a RunConfig; ``overrides`` replace single parameters"""
        params = {
            key: config.get(key)
            for key in cls._get_param_names()
            if key != 'canonical'
        }
        params.update(overrides)
        return cls(**params)

    def arp_config(self) -> ArpConfig:
        return ArpConfig(self.arp_radial_count, self.arp_angular_count, self.arp_start_angle, self.arp_circle)

    def quantizer_config(self) -> QuantizerConfig:
        return QuantizerConfig(self.q_area_threshold, tuple(self.q_dist_edges), self.q_angle_bins,
                               self.q_degree_threshold)

    def section_config(self) -> SectionConfig:
        return SectionConfig(self.section_window, self.section_eps_line)

    def prepare(self, contour: Contour, canonical: Optional[bool] = None) -> Contour:
        """Resampled contour, in canonical pose unless disabled"""
        use_canonical = self.canonical if canonical is None else canonical
        prepared = resample(contour, self.resample_n)
        if use_canonical:
            prepared = canonical_pose(prepared)[0]
        return prepared

    def details(self, contour: Contour, canonical: Optional[bool] = None) -> ShapeEncoding:
        return encode_details(self.prepare(contour, canonical), self.arp_config(),
                              self.quantizer_config(), self.section_config())

    def encode(self, contour: Contour, canonical: Optional[bool] = None) -> SymbolString:
        return self.details(contour, canonical).symbols

    def encode_prepared(self, contour: Contour) -> SymbolString:
        """Encode a contour that is already resampled and posed"""
        return encode_shape(contour, self.arp_config(), self.quantizer_config(), self.section_config())

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> List[SymbolString]:
        return [self.encode(c if isinstance(c, Contour) else Contour.from_points(np.asarray(c))) for c in X]
