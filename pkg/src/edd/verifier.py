"""Ground-truth layout engine and exhaustive reference solver.

Given candidate fragment orders, this module plots both digests on one
line, derives the overlap sub-fragments, and checks them against the
cross-digest data -- the defining test of a valid layout.  The
exhaustive solver tries every permutation pair and keeps what passes;
it exists to witness the fast solver's answers and deliberately shares
none of its machinery (only the plain Solution containers and the
orientation key are imported).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import accumulate, permutations
from typing import NamedTuple

from .instance import EddInstance, LabeledLength
from .solver import CPermutation, Solution, canonical_key, canonicalize_solution

COINCIDENT_CUT = "COINCIDENT_CUT"
SUM_MISMATCH = "SUM_MISMATCH"


class LayoutError(ValueError):
    rule = "LAYOUT"


class CoincidentCut(LayoutError):
    """An internal cut of one digest lands exactly on a cut of the other;
    the two enzymes never share a site, so such a layout is unphysical."""

    rule = COINCIDENT_CUT

    def __init__(self, position: int):
        super().__init__(f"cut position {position} appears in both digests")
        self.position = position


class SumMismatch(LayoutError):
    rule = SUM_MISMATCH

    def __init__(self, total_a: int, total_b: int):
        super().__init__(f"digest totals differ: {total_a} vs {total_b}")
        self.total_a = total_a
        self.total_b = total_b


class OracleCapExceeded(RuntimeError):
    def __init__(self, p: int, q: int, cap: int):
        super().__init__(f"p + q = {p + q} exceeds exhaustive-search cap {cap}")


class LayoutPiece(NamedTuple):
    start: int
    end: int
    a_index: int   # original A-fragment index covering this piece
    b_index: int

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Layout:
    """Both digests plotted on [0, total]: internal cuts plus the pieces
    the overlaps carve out."""

    total_length: int
    a_boundaries: tuple[int, ...]
    b_boundaries: tuple[int, ...]
    pieces: tuple[LayoutPiece, ...]


def _check_permutation(seq, count, name):
    if sorted(seq) != list(range(count)):
        raise ValueError(f"{name} is not a permutation of 0..{count - 1}")


def layout(pa, pb, inst: EddInstance) -> Layout:
    """Cut [0, total] by both orderings and tag each piece with its owners.

    ``pa``/``pb`` are 0-based index orders into a_lengths/b_lengths.
    Raises SumMismatch or CoincidentCut for unplottable inputs.
    """
    pa = tuple(pa)
    pb = tuple(pb)
    _check_permutation(pa, inst.p, "pa")
    _check_permutation(pb, inst.q, "pb")
    a_prefix = list(accumulate(inst.a_lengths[i] for i in pa))
    b_prefix = list(accumulate(inst.b_lengths[j] for j in pb))
    if a_prefix[-1] != b_prefix[-1]:
        raise SumMismatch(a_prefix[-1], b_prefix[-1])
    total = a_prefix[-1]
    a_cuts = a_prefix[:-1]
    b_cuts = b_prefix[:-1]
    shared = set(a_cuts) & set(b_cuts)
    if shared:
        raise CoincidentCut(min(shared))

    bounds = sorted([0, total] + a_cuts + b_cuts)
    pieces = []
    ai = bi = 0
    for start, end in zip(bounds, bounds[1:]):
        pieces.append(LayoutPiece(start, end, pa[ai], pb[bi]))
        if ai < len(a_cuts) and a_prefix[ai] == end:
            ai += 1
        if bi < len(b_cuts) and b_prefix[bi] == end:
            bi += 1
    return Layout(total, tuple(a_cuts), tuple(b_cuts), tuple(pieces))


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def verify_permutation(inst: EddInstance, pa, pb) -> VerifyResult:
    """Decide whether (pa, pb) is a valid layout of the instance.

    Valid means: the overlap pieces reproduce the multiset C, and the
    pieces covered by each fragment reproduce exactly its cross-digest
    multiset.  The first failing check is reported.
    """
    try:
        lay = layout(pa, pb, inst)
    except LayoutError as err:
        return VerifyResult(False, err.rule)

    lengths = sorted(piece.length for piece in lay.pieces)
    expected = sorted(v for s in inst.ab_sets for v in s)
    if lengths != expected:
        return VerifyResult(False, "piece multiset differs from C")

    by_a: dict[int, list[int]] = {}
    by_b: dict[int, list[int]] = {}
    for piece in lay.pieces:
        by_a.setdefault(piece.a_index, []).append(piece.length)
        by_b.setdefault(piece.b_index, []).append(piece.length)
    for i, want in enumerate(inst.ab_sets):
        if tuple(sorted(by_a.get(i, []))) != want:
            return VerifyResult(False, f"AB_{i + 1} mismatch")
    for j, want in enumerate(inst.ba_sets):
        if tuple(sorted(by_b.get(j, []))) != want:
            return VerifyResult(False, f"BA_{j + 1} mismatch")
    return VerifyResult(True)


def _solution_from_layout(inst: EddInstance, pa, pb) -> Solution:
    lay = layout(pa, pb, inst)
    counts: dict[int, int] = {}
    elems = []
    for piece in lay.pieces:
        v = piece.length
        counts[v] = counts.get(v, 0) + 1
        elems.append(LabeledLength(v, piece.a_index, piece.b_index, counts[v]))
    return Solution(tuple(pa), tuple(pb), CPermutation(tuple(elems)))


DEFAULT_ORACLE_CAP = 12


def brute_force_solve(inst: EddInstance, max_total: int = DEFAULT_ORACLE_CAP) -> list[Solution]:
    """Try all p!*q! permutation pairs; return the valid layouts.

    Output is canonicalized for orientation, deduplicated, and sorted by
    its canonical key, so it compares directly against the fast solver.
    """
    p, q = inst.p, inst.q
    if p + q > max_total:
        raise OracleCapExceeded(p, q, max_total)
    found: dict = {}
    for pa in permutations(range(p)):
        for pb in permutations(range(q)):
            if verify_permutation(inst, pa, pb):
                sol = canonicalize_solution(inst, _solution_from_layout(inst, pa, pb))
                key = canonical_key(inst, sol)
                if key not in found:
                    found[key] = sol
    return [found[k] for k in sorted(found)]
