"""Ground-truth instance generation by simulating a double digest.

Cut a line of known length at two disjoint site sets, read off the
fragment and sub-fragment lengths, and the resulting dataset is
consistent by construction with the identity ordering as a known
solution.  The seeded generator layers reproducible randomness on top;
its stream is Python's Mersenne Twister (``random.Random(seed)``), so
equal seeds reproduce equal instances within this implementation.
Fixtures meant to outlive it should be exchanged as EDD files.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .instance import EddInstance, _CElementSeq
from .solver import CPermutation, Solution


class InfeasibleParams(ValueError):
    pass


@dataclass(frozen=True)
class CutModel:
    """A line of ``total_length`` with two disjoint internal cut sets."""

    total_length: int
    cuts_a: tuple[int, ...]
    cuts_b: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cuts_a", tuple(self.cuts_a))
        object.__setattr__(self, "cuts_b", tuple(self.cuts_b))
        if self.total_length < 1:
            raise ValueError("total_length must be positive")
        for name, cuts in (("cuts_a", self.cuts_a), ("cuts_b", self.cuts_b)):
            if list(cuts) != sorted(set(cuts)):
                raise ValueError(f"{name} must be strictly increasing")
            if cuts and not (0 < cuts[0] and cuts[-1] < self.total_length):
                raise ValueError(f"{name} must lie strictly inside (0, total_length)")
        if set(self.cuts_a) & set(self.cuts_b):
            raise ValueError("cut sites of the two enzymes must not coincide")


def _gaps(cuts, total):
    bounds = [0, *cuts, total]
    return tuple(b - a for a, b in zip(bounds, bounds[1:]))


def instance_from_cuts(model: CutModel) -> tuple[EddInstance, Solution]:
    """Digest the cut model into an EddInstance plus its ground truth.

    A and B are the gap lengths of each cut set; AB_i/BA_j collect the
    pieces of the union digest falling inside each fragment.  The
    returned Solution is the identity ordering with the physical
    left-to-right labeling (its C-ordering is an array-backed view, so
    large models stay cheap).
    """
    total = model.total_length
    ca = np.asarray(model.cuts_a, dtype=np.int64)
    cb = np.asarray(model.cuts_b, dtype=np.int64)
    a_lengths = _gaps(model.cuts_a, total)
    b_lengths = _gaps(model.cuts_b, total)

    bounds = np.concatenate(([0], np.sort(np.concatenate((ca, cb))), [total]))
    lengths = np.diff(bounds)
    starts = bounds[:-1]
    a_idx = np.searchsorted(ca, starts, side="right")
    b_idx = np.searchsorted(cb, starts, side="right")

    length_list = lengths.tolist()
    ab_groups = _group_slices(length_list, a_idx, len(a_lengths))
    ba_groups = _group_slices(length_list, b_idx, len(b_lengths))
    inst = EddInstance(a_lengths, b_lengths, ab_groups, ba_groups)

    copy_ids = _occurrence_counts(lengths)
    pi_c = CPermutation(_CElementSeq(lengths, a_idx, b_idx, copy_ids))
    truth = Solution(tuple(range(inst.p)), tuple(range(inst.q)), pi_c)
    return inst, truth


def _group_slices(values: list, owners: np.ndarray, count: int):
    # owners is non-decreasing along the line, so groups are contiguous slices
    offsets = np.concatenate(([0], np.cumsum(np.bincount(owners, minlength=count))))
    off = offsets.tolist()
    return tuple(tuple(values[off[i]:off[i + 1]]) for i in range(count))


def _occurrence_counts(values: np.ndarray) -> np.ndarray:
    """1-based per-value occurrence counter, in sequence order."""
    n = len(values)
    order = np.argsort(values, kind="stable")
    sv = values[order]
    starts = np.flatnonzero(np.concatenate(([True], sv[1:] != sv[:-1])))
    sizes = np.diff(np.append(starts, n))
    within = np.arange(n, dtype=np.int64) - np.repeat(starts, sizes)
    out = np.empty(n, dtype=np.int64)
    out[order] = within + 1
    return out


def random_instance(seed: int, p: int, q: int, total_length: int, *,
                    min_duplicates: int = 0,
                    duplicate_free: bool = False,
                    max_retries: int = 1000) -> tuple[EddInstance, Solution]:
    """Seeded random instance with p and q fragments on a given length.

    Draws p+q-2 distinct internal cut positions and assigns p-1 of them
    to the first enzyme at random.  ``min_duplicates`` demands at least
    that many repeated values in C (duplicates = |C| minus the number of
    distinct values); ``duplicate_free`` demands none.  Both resample up
    to ``max_retries`` times.
    """
    if p < 1 or q < 1:
        raise InfeasibleParams("p and q must be at least 1")
    if duplicate_free and min_duplicates:
        raise InfeasibleParams("duplicate_free contradicts min_duplicates")
    k = p + q - 2
    if k > total_length - 1:
        raise InfeasibleParams(
            f"cannot place {k} distinct cuts inside a length-{total_length} line")

    rng = random.Random(seed)
    for _ in range(max(1, max_retries)):
        positions = sorted(rng.sample(range(1, total_length), k))
        a_picks = set(rng.sample(range(k), p - 1))
        cuts_a = tuple(positions[t] for t in range(k) if t in a_picks)
        cuts_b = tuple(positions[t] for t in range(k) if t not in a_picks)
        inst, truth = instance_from_cuts(CutModel(total_length, cuts_a, cuts_b))
        flat_values = inst._flats()[0]
        dupes = len(flat_values) - len(np.unique(flat_values))
        if duplicate_free and dupes:
            continue
        if dupes < min_duplicates:
            continue
        return inst, truth
    raise InfeasibleParams(
        f"no instance with the requested duplicate profile after {max_retries} tries")
