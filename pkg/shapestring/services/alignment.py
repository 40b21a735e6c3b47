"""
Needleman-Wunsch alignment of token sequences.

The fill matrix starts with zero borders, so leading gaps are free while
inner and trailing gaps pay the gap penalty.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import List, Sequence, Tuple, Union

import numpy as np

from ..exceptions import InconsistentMatrix
from .encoding import SymbolString, Token, as_tokens

logger = logging.getLogger(__name__)

Sequenceish = Union[SymbolString, str, Sequence[Union[Token, str]]]

_FAMILY_CODES = {}


@dataclass(frozen=True)
class ScoreTable:
    """Substitution scores; within a family ranks i != j score 1/|i-j|"""

    match_score: float = 2.0
    gap: float = -2.0
    mismatch: float = -2.0

    def score(self, a: Token, b: Token) -> float:
        if a.family is not b.family:
            return self.mismatch
        if a.rank == b.rank:
            return self.match_score
        return 1.0 / abs(a.rank - b.rank)

    def matrix(self, a: Sequence[Token], b: Sequence[Token]) -> np.ndarray:
        """Substitution score of every (a_i, b_j) pair"""
        fam_a, rank_a = _codes(a)
        fam_b, rank_b = _codes(b)
        same_family = fam_a[:, None] == fam_b[None, :]
        diff = np.abs(rank_a[:, None] - rank_b[None, :]).astype(float)
        within = np.divide(1.0, diff, out=np.full(diff.shape, float(self.match_score)), where=diff > 0)
        return np.where(same_family, within, float(self.mismatch))


def _codes(tokens: Sequence[Token]) -> Tuple[np.ndarray, np.ndarray]:
    families = np.array([_FAMILY_CODES.setdefault(t.family, len(_FAMILY_CODES)) for t in tokens], dtype=int)
    ranks = np.array([t.rank for t in tokens], dtype=int)
    return families, ranks


def substitution_score(a: Union[Token, str], b: Union[Token, str], t: ScoreTable = ScoreTable()) -> float:
    a_tok = a if isinstance(a, Token) else Token.parse(a)
    b_tok = b if isinstance(b, Token) else Token.parse(b)
    return t.score(a_tok, b_tok)


@dataclass(frozen=True, eq=False)
class DpMatrix:
    """Fill matrix; rows follow sequence a, columns sequence b"""

    F: np.ndarray
    a: Tuple[Token, ...]
    b: Tuple[Token, ...]

    @property
    def score(self) -> float:
        return float(self.F[-1, -1])

    @property
    def interior(self) -> np.ndarray:
        return self.F[1:, 1:]


def nw_fill(a: Sequenceish, b: Sequenceish, t: ScoreTable = ScoreTable()) -> DpMatrix:
    """
    Fill the alignment matrix

    F[i][j] = max(F[i-1][j-1] + S(a_i, b_j), F[i][j-1] + w, F[i-1][j] + w)
    with row 0 and column 0 left at zero.

    Args:
        a: First sequence (rows)
        b: Second sequence (columns)
        t: Substitution and gap scores

    Returns:
        (m+1) x (n+1) matrix
    """
    tok_a = as_tokens(a)
    tok_b = as_tokens(b)
    m, n = len(tok_a), len(tok_b)
    F = np.zeros((m + 1, n + 1))
    if m and n:
        subst = t.matrix(tok_a, tok_b)
        for i in range(1, m + 1):
            for j in range(1, n + 1):
                F[i, j] = max(
                    F[i - 1, j - 1] + subst[i - 1, j - 1],
                    F[i, j - 1] + t.gap,
                    F[i - 1, j] + t.gap,
                )
    return DpMatrix(F=F, a=tok_a, b=tok_b)


class OpKind(str, Enum):
    MATCH = 'match'
    GAP_IN_A = 'gap_in_a'
    GAP_IN_B = 'gap_in_b'


@dataclass(frozen=True)
class AlignOp:
    """One alignment column; ``i`` indexes a and ``j`` indexes b (None on a gap)"""

    kind: OpKind
    i: Union[int, None]
    j: Union[int, None]
    score: float


@dataclass(frozen=True)
class Alignment:
    ops: Tuple[AlignOp, ...]
    score: float
    normalized: float
    a: Tuple[Token, ...] = ()
    b: Tuple[Token, ...] = ()

    def rows(self) -> Tuple[List[str], List[str]]:
        """Aligned token names with '-' on gaps"""
        top = [self.a[op.i].name if op.i is not None else '-' for op in self.ops]
        bottom = [self.b[op.j].name if op.j is not None else '-' for op in self.ops]
        return top, bottom

    def op_scores(self) -> List[float]:
        return [op.score for op in self.ops]


def _same(x: float, y: float) -> bool:
    return x == y or bool(np.isclose(x, y, rtol=0.0, atol=1e-9))


def traceback(F: DpMatrix, a: Sequenceish = None, b: Sequenceish = None,
              t: ScoreTable = ScoreTable()) -> Alignment:
    """
    Recover one optimal alignment, walking back from the bottom-right cell

    Ties prefer the diagonal, then a gap in b (up), then a gap in a (left).
    Reaching row 0 or column 0 ends the walk; the remaining prefix becomes
    leading gaps scored 0.
    """
    tok_a = as_tokens(a) if a is not None else F.a
    tok_b = as_tokens(b) if b is not None else F.b
    grid = F.F
    if grid.shape != (len(tok_a) + 1, len(tok_b) + 1):
        raise InconsistentMatrix(f"Matrix shape {grid.shape} does not fit sequences of {len(tok_a)} and {len(tok_b)}")

    ops: List[AlignOp] = []
    i, j = len(tok_a), len(tok_b)
    while i > 0 and j > 0:
        here = grid[i, j]
        diag = t.score(tok_a[i - 1], tok_b[j - 1])
        if _same(here, grid[i - 1, j - 1] + diag):
            ops.append(AlignOp(OpKind.MATCH, i - 1, j - 1, diag))
            i, j = i - 1, j - 1
        elif _same(here, grid[i - 1, j] + t.gap):
            ops.append(AlignOp(OpKind.GAP_IN_B, i - 1, None, t.gap))
            i -= 1
        elif _same(here, grid[i, j - 1] + t.gap):
            ops.append(AlignOp(OpKind.GAP_IN_A, None, j - 1, t.gap))
            j -= 1
        else:
            raise InconsistentMatrix(f"No predecessor reproduces cell ({i}, {j}) = {here}")

    while i > 0:
        ops.append(AlignOp(OpKind.GAP_IN_B, i - 1, None, 0.0))
        i -= 1
    while j > 0:
        ops.append(AlignOp(OpKind.GAP_IN_A, None, j - 1, 0.0))
        j -= 1

    ops.reverse()
    score = F.score
    return Alignment(
        ops=tuple(ops),
        score=score,
        normalized=_normalize(score, len(tok_a), len(tok_b), t),
        a=tok_a,
        b=tok_b,
    )


def align(a: Sequenceish, b: Sequenceish, t: ScoreTable = ScoreTable()) -> Alignment:
    """Fill and trace back in one call"""
    return traceback(nw_fill(a, b, t), t=t)


def alignment_score(a: Sequenceish, b: Sequenceish, t: ScoreTable = ScoreTable()) -> float:
    """
    Final fill score computed row by row

    Within a row F[i][j] = w*j + max_{k<=j}(T[k] - w*k), where T holds the
    diagonal and vertical candidates and T[0] = 0.
    """
    tok_a = as_tokens(a)
    tok_b = as_tokens(b)
    m, n = len(tok_a), len(tok_b)
    if m == 0 or n == 0:
        return 0.0

    subst = t.matrix(tok_a, tok_b)
    ramp = t.gap * np.arange(n + 1)
    row = np.zeros(n + 1)
    cand = np.zeros(n + 1)
    for i in range(m):
        cand[1:] = np.maximum(row[:-1] + subst[i], row[1:] + t.gap)
        row = ramp + np.maximum.accumulate(cand - ramp)
    return float(row[-1])


def _normalize(score: float, m: int, n: int, t: ScoreTable) -> float:
    if m == 0 and n == 0:
        return 1.0
    if m == 0 or n == 0:
        return 0.0
    return score / (t.match_score * max(m, n))


def similarity(a: Sequenceish, b: Sequenceish, t: ScoreTable = ScoreTable()) -> float:
    """Alignment score divided by the best possible score for the longer sequence"""
    tok_a = as_tokens(a)
    tok_b = as_tokens(b)
    return _normalize(alignment_score(tok_a, tok_b, t), len(tok_a), len(tok_b), t)
