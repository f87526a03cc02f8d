"""All-solutions search for consistent EDD instances.

The search runs on the digest graph: a labeled instance is solvable
exactly when its graph is a tree whose diameter carries everything else
as 2-node danglers.  Walking the diameter and reading dangler groups as
interchangeable blocks yields a compact family describing every valid
layout; duplicate values are handled by running the walk once per
duplicate assignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .digestgraph import (
    DigestGraph,
    NodeRef,
    StructureVerdict,
    StructureViolation,
    build_graph,
    check_structure,
)
from .instance import (
    AssignmentCapExceeded,
    EddInstance,
    LabeledInstance,
    LabeledLength,
    _labeling_plan,
    label_duplicates,
)

DEFAULT_MAX_ASSIGNMENTS = 10_080  # 7! * 2
DEFAULT_MAX_EXPANSIONS = 10_000


class NotConsecutiveError(ValueError):
    """A candidate C-ordering scatters some fragment's elements."""

    def __init__(self, kind: str, index: int):
        super().__init__(f"elements of {kind}-fragment {index + 1} are not consecutive")
        self.kind = kind
        self.index = index


@dataclass(frozen=True, eq=False)
class CPermutation:
    """An ordering of the labeled C-elements."""

    order: Sequence[LabeledLength]

    def values(self) -> tuple[int, ...]:
        return tuple(e.value for e in self.order)

    def __len__(self) -> int:
        return len(self.order)


@dataclass(frozen=True, eq=False)
class Solution:
    """A valid layout: fragment orders pi_a / pi_b (0-based indices) plus
    the C-ordering they were induced from."""

    pi_a: tuple[int, ...]
    pi_b: tuple[int, ...]
    pi_c: CPermutation

    def a_values(self, inst: EddInstance) -> tuple[int, ...]:
        return tuple(inst.a_lengths[i] for i in self.pi_a)

    def b_values(self, inst: EddInstance) -> tuple[int, ...]:
        return tuple(inst.b_lengths[j] for j in self.pi_b)

    def c_values(self) -> tuple[int, ...]:
        return self.pi_c.values()


def mirror_solution(sol: Solution) -> Solution:
    return Solution(tuple(reversed(sol.pi_a)), tuple(reversed(sol.pi_b)),
                    CPermutation(tuple(reversed(tuple(sol.pi_c.order)))))


def canonical_key(inst: EddInstance, sol: Solution):
    """Orientation-free identity of a layout.

    A layout read right-to-left is the same physical map, so the key is
    the lexicographically smaller of the value sequences (C, A, B) and
    their reversals.
    """
    c = sol.c_values()
    a = sol.a_values(inst)
    b = sol.b_values(inst)
    forward = (c, a, b)
    backward = (c[::-1], a[::-1], b[::-1])
    return min(forward, backward)


def canonicalize_solution(inst: EddInstance, sol: Solution) -> Solution:
    c = sol.c_values()
    a = sol.a_values(inst)
    b = sol.b_values(inst)
    if (c[::-1], a[::-1], b[::-1]) < (c, a, b):
        return mirror_solution(sol)
    return sol


# --- solution families -----------------------------------------------------

class Fixed(NamedTuple):
    """A slot holding exactly one C-element."""

    element: LabeledLength


class Block(NamedTuple):
    """Interchangeable C-elements attached at one diameter node.

    Every ordering of ``elements`` (stored ascending by value, copy)
    is valid in place."""

    attachment: NodeRef
    elements: tuple[LabeledLength, ...]


@dataclass(eq=False)
class SolutionFamily:
    """Compact form of every valid C-ordering for one labeled instance.

    ``order`` lists C-indices in the canonical reading direction with
    each block's interior ascending; blocks are half-open index ranges
    into it.  Expanding the blocks in all ways yields every valid
    layout.  The family is stored in the lexicographically smaller of
    the two reading directions (``canonical_orientation``)."""

    labeled: LabeledInstance
    order: np.ndarray
    block_starts: np.ndarray
    block_ends: np.ndarray
    block_attach: np.ndarray   # contracted node id per block
    canonical_orientation: bool = True

    @property
    def slots(self) -> tuple[Fixed | Block, ...]:
        cached = self.__dict__.get("_slots_cache")
        if cached is None:
            cached = self._build_slots()
            self.__dict__["_slots_cache"] = cached
        return cached

    def _build_slots(self):
        elems = self.labeled.c_elements
        p = self.labeled.base.p
        order = self.order.tolist()
        out: list[Fixed | Block] = []
        pos = 0
        spans = list(zip(self.block_starts.tolist(), self.block_ends.tolist(),
                         self.block_attach.tolist()))
        span_i = 0
        while pos < len(order):
            if span_i < len(spans) and spans[span_i][0] == pos:
                s, e, att = spans[span_i]
                span_i += 1
                ref = NodeRef("A", att) if att < p else NodeRef("B", att - p)
                out.append(Block(ref, tuple(elems[k] for k in order[s:e])))
                pos = e
            else:
                out.append(Fixed(elems[order[pos]]))
                pos += 1
        return tuple(out)

    def block_sizes(self) -> tuple[int, ...]:
        return tuple((self.block_ends - self.block_starts).tolist())

    @property
    def expansion_count(self) -> int:
        """Number of raw expansions: product of block-size factorials."""
        sizes = self.block_ends - self.block_starts
        if not len(sizes):
            return 1
        total = 1
        for size, times in zip(*np.unique(sizes, return_counts=True)):
            total *= math.factorial(int(size)) ** int(times)
        return total

    def c_value_array(self) -> np.ndarray:
        return self.labeled.values[self.order]

    def family_key(self) -> tuple:
        """Value-level identity: equal keys expand to equal layout sets."""
        return (self.c_value_array().tobytes(),
                self.block_starts.tobytes(), self.block_ends.tobytes())

    def induced_index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """pi_a / pi_b for the canonical expansion, as index arrays."""
        lab = self.labeled
        pi_a = _dedupe_runs(lab.a_owners[self.order], lab.base.p, "A")
        pi_b = _dedupe_runs(lab.b_owners[self.order], lab.base.q, "B")
        return pi_a, pi_b


def _dedupe_runs(owners: np.ndarray, count: int, kind: str) -> np.ndarray:
    if not len(owners):
        raise ValueError("empty ordering")
    runs = owners[np.concatenate(([True], owners[1:] != owners[:-1]))]
    if len(runs) != count:
        seen = np.bincount(runs, minlength=count)
        bad = int(np.flatnonzero(seen != 1)[0])
        raise NotConsecutiveError(kind, bad)
    return runs


def _lex_less(x: np.ndarray, y: np.ndarray) -> bool:
    diff = np.flatnonzero(x != y)
    if not len(diff):
        return False
    i = diff[0]
    return bool(x[i] < y[i])


def _assemble(lab: LabeledInstance, spine: np.ndarray, links: np.ndarray,
              pend_c: np.ndarray, pend_pos: np.ndarray):
    """Lay out pendant blocks and spine links in reading order."""
    m1 = len(spine)
    counts = np.bincount(pend_pos, minlength=m1)
    sizes = counts.copy()
    if m1 > 1:
        sizes[:-1] += 1
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    order = np.empty(int(offsets[-1]), dtype=np.int64)
    if len(pend_c):
        first = np.cumsum(counts) - counts
        within = np.arange(len(pend_c), dtype=np.int64) - np.repeat(first, counts)
        order[offsets[pend_pos] + within] = pend_c
    if m1 > 1:
        order[offsets[:m1 - 1] + counts[:m1 - 1]] = links
    bpos = np.flatnonzero(counts >= 2)
    return (order, offsets[bpos], offsets[bpos] + counts[bpos], spine[bpos])


def dangler_first_search(g: DigestGraph, verdict: StructureVerdict) -> SolutionFamily:
    """Read the diameter once, emitting dangler groups as blocks.

    Fixed slots carry the diameter's interior C-nodes in walk order; at
    every diameter node the C-elements that hang off it as danglers --
    plus, at the two interior end nodes, the terminal diameter C-node,
    whose position is equally free -- form one interchangeable block
    placed right after the incoming C-slot.  O(n).
    """
    if not verdict.is_tree or verdict.violation is not None:
        raise ValueError("dangler-first search requires a violation-free verdict")
    pay = verdict._payload
    lab = g.labeled
    empty = np.empty(0, dtype=np.int64)
    if pay.single:
        return SolutionFamily(lab, np.zeros(1, dtype=np.int64), empty, empty, empty)

    fwd = _assemble(lab, pay.spine, pay.links, pay.pend_c, pay.pend_pos)
    m1 = len(pay.spine)
    rpos = (m1 - 1) - pay.pend_pos
    rsort = np.lexsort((lab.copy_ids[pay.pend_c], lab.values[pay.pend_c], rpos))
    rev = _assemble(lab, pay.spine[::-1], pay.links[::-1],
                    pay.pend_c[rsort], rpos[rsort])
    chosen = rev if _lex_less(lab.values[rev[0]], lab.values[fwd[0]]) else fwd
    return SolutionFamily(lab, *chosen)


def induced_permutation(pc: CPermutation, inst: LabeledInstance) -> Solution:
    """Group a C-ordering into its fragment orders (pi_a, pi_b).

    Maximal runs sharing an owner become that owner's slot; an owner
    split across two runs raises NotConsecutiveError.
    """
    if len(pc.order) != inst.n:
        raise ValueError("ordering does not cover C")
    pi_a: list[int] = []
    pi_b: list[int] = []
    seen_a: set[int] = set()
    seen_b: set[int] = set()
    prev_a = prev_b = -1
    for e in pc.order:
        if e.a_owner != prev_a:
            if e.a_owner in seen_a:
                raise NotConsecutiveError("A", e.a_owner)
            seen_a.add(e.a_owner)
            pi_a.append(e.a_owner)
            prev_a = e.a_owner
        if e.b_owner != prev_b:
            if e.b_owner in seen_b:
                raise NotConsecutiveError("B", e.b_owner)
            seen_b.add(e.b_owner)
            pi_b.append(e.b_owner)
            prev_b = e.b_owner
    if len(pi_a) != inst.base.p or len(pi_b) != inst.base.q:
        raise ValueError("ordering does not touch every fragment")
    return Solution(tuple(pi_a), tuple(pi_b), pc)


@dataclass(frozen=True)
class NoSolution:
    """Verdict for an unsolvable labeled instance."""

    violation: StructureViolation


def solve_labeled(inst: LabeledInstance, *, engine: str = "auto") -> SolutionFamily | NoSolution:
    """Run the core pipeline on one labeled instance: build the digest
    graph, screen its structure, then walk the diameter.  O(n)."""
    g = build_graph(inst)
    verdict = check_structure(g, engine=engine)
    if verdict.violation is not None:
        return NoSolution(verdict.violation)
    return dangler_first_search(g, verdict)


@dataclass(eq=False)
class FamilyExpansion:
    solutions: tuple[Solution, ...]
    truncated: bool

    def __iter__(self) -> Iterator[Solution]:
        return iter(self.solutions)

    def __len__(self) -> int:
        return len(self.solutions)


def expand_family(fam: SolutionFamily, inst: LabeledInstance | None = None,
                  max_expansions: int = DEFAULT_MAX_EXPANSIONS) -> FamilyExpansion:
    """Enumerate block orderings (lexicographic by value) into Solutions.

    Expansions that repeat an (A-values, B-values) sequence are dropped,
    which only happens when equal values share a block.  Enumeration
    stops at the cap with ``truncated`` set.
    """
    if inst is None:
        inst = fam.labeled
    elems = list(inst.c_elements)
    base = fam.order.tolist()
    spans = list(zip(fam.block_starts.tolist(), fam.block_ends.tolist()))
    solutions: list[Solution] = []
    seen: set = set()
    truncated = False
    for combo in product(*(permutations(range(s, e)) for s, e in spans)):
        arr = base[:]
        for (s, _e), perm in zip(spans, combo):
            for off, src in enumerate(perm):
                arr[s + off] = base[src]
        sol = induced_permutation(CPermutation(tuple(elems[k] for k in arr)), inst)
        key = (sol.a_values(inst.base), sol.b_values(inst.base))
        if key in seen:
            continue
        if len(solutions) >= max_expansions:
            truncated = True
            break
        seen.add(key)
        solutions.append(sol)
    return FamilyExpansion(tuple(solutions), truncated)


# --- duplicate assignments -------------------------------------------------

def _copy_label(value: int, owner: int, sets: tuple[tuple[int, ...], ...]):
    # single-element fragments of the same length are interchangeable
    if sets[owner] == (value,):
        return ("s",)
    return ("f", owner)


def _lehmer_rank(perm: tuple[int, ...]) -> int:
    m = len(perm)
    rank = 0
    for i in range(m):
        smaller = sum(1 for j in range(i + 1, m) if perm[j] < perm[i])
        rank = rank * (m - i) + smaller
    return rank


def _distinct_matchings(a_labels, b_labels, cap: int | None):
    """One representative bijection per distinct pairing multiset.

    Bijections pairing the same multiset of (AB-side label, BA-side
    label) produce digest graphs identical up to renaming interchangeable
    fragments, hence identical value-level families.  Returns (perm,
    rank-in-full-lex-enumeration) pairs, ranks ascending.
    """
    if len(a_labels) <= 8:
        return _distinct_by_scan(a_labels, b_labels)
    return _distinct_by_recursion(a_labels, b_labels, cap)


def _distinct_by_scan(a_labels, b_labels):
    # full lexicographic scan keeps the smallest representative per class
    m = len(a_labels)
    seen: dict = {}
    for rank, perm in enumerate(permutations(range(m))):
        sig = tuple(sorted(zip(a_labels, (b_labels[s] for s in perm))))
        if sig not in seen:
            seen[sig] = (perm, rank)
    return list(seen.values())


def _distinct_by_recursion(a_labels, b_labels, cap: int | None):
    # positions grouped by equal AB-side label; candidates ranked by
    # (BA-side label, index) so each group's picks can be forced into
    # ascending rank order, which makes every pairing multiset unique
    m = len(a_labels)
    pos_order = sorted(range(m), key=lambda t: (a_labels[t], t))
    cand_order = sorted(range(m), key=lambda s: (b_labels[s], s))
    used = [False] * m
    choice_rank = [0] * m
    chosen_slot = [0] * m
    out: list[tuple[tuple[int, ...], int]] = []

    def rec(d: int):
        if cap is not None and len(out) > cap:
            return
        if d == m:
            perm = [0] * m
            for dd, t in enumerate(pos_order):
                perm[t] = chosen_slot[dd]
            tp = tuple(perm)
            out.append((tp, _lehmer_rank(tp)))
            return
        t = pos_order[d]
        start = 0
        if d and a_labels[pos_order[d - 1]] == a_labels[t]:
            start = choice_rank[d - 1] + 1
        tried = set()
        for r in range(start, m):
            s = cand_order[r]
            if used[s] or b_labels[s] in tried:
                continue
            tried.add(b_labels[s])
            used[s] = True
            choice_rank[d] = r
            chosen_slot[d] = s
            rec(d + 1)
            used[s] = False

    rec(0)
    out.sort(key=lambda pr: pr[1])
    return out


@dataclass(eq=False)
class SolveResult:
    """Families found per duplicate assignment; behaves as a sequence of
    (assignment-id, family) pairs and is truthy iff solutions exist."""

    families: list[tuple[int, SolutionFamily]]
    assignments_tried: int
    first_violation: StructureViolation | None

    def __iter__(self):
        return iter(self.families)

    def __len__(self) -> int:
        return len(self.families)

    def __getitem__(self, k):
        return self.families[k]

    def __bool__(self) -> bool:
        return bool(self.families)


def solve(inst: EddInstance, *,
          max_assignments: int | None = DEFAULT_MAX_ASSIGNMENTS,
          structural_dedup: bool = True,
          first_only: bool = False,
          engine: str = "auto") -> SolveResult:
    """Solve a consistent instance across all duplicate assignments.

    Each assignment of equal-valued copies is screened with the linear
    pipeline; families that coincide at value level are reported once,
    keyed by the first assignment id that produced them.  With
    ``structural_dedup`` (default) assignments that provably relabel one
    another are skipped up front, which collapses the factorial blowup
    on symmetric inputs; ids still match the full enumeration order.
    ``first_only`` stops at the first family (existence checks).
    """
    plan = _labeling_plan(inst)
    families: list[tuple[int, SolutionFamily]] = []
    seen_keys: set = set()
    first_violation: StructureViolation | None = None
    tried = 0

    if structural_dedup:
        per_group: list[list[tuple[tuple[int, ...], int]]] = []
        radices: list[int] = []
        total = 1
        for cpos, owners in plan.groups:
            value = int(plan.values[cpos[0]])
            a_labels = [_copy_label(value, int(plan.a_owners[cp]), inst.ab_sets) for cp in cpos]
            b_labels = [_copy_label(value, o, inst.ba_sets) for o in owners]
            matchings = _distinct_matchings(a_labels, b_labels, max_assignments)
            per_group.append(matchings)
            radices.append(math.factorial(len(cpos)))
            total *= len(matchings)
            if max_assignments is not None and total > max_assignments:
                raise AssignmentCapExceeded(total, max_assignments)
        suffix = [1] * (len(radices) + 1)
        for i in range(len(radices) - 1, -1, -1):
            suffix[i] = suffix[i + 1] * radices[i]

        for combo in product(*per_group):
            aid = sum(rank * suffix[i + 1] for i, (_perm, rank) in enumerate(combo))
            b_own = plan.base_b.copy()
            for (cpos, owners), (perm, _rank) in zip(plan.groups, combo):
                for t, s in enumerate(perm):
                    b_own[cpos[t]] = owners[s]
            lab = LabeledInstance(inst, plan.values, plan.a_owners, b_own, plan.copy_ids)
            tried += 1
            out = solve_labeled(lab, engine=engine)
            if isinstance(out, NoSolution):
                if first_violation is None:
                    first_violation = out.violation
                continue
            key = out.family_key()
            if key not in seen_keys:
                seen_keys.add(key)
                families.append((aid, out))
                if first_only:
                    break
    else:
        if max_assignments is not None and plan.total > max_assignments:
            raise AssignmentCapExceeded(plan.total, max_assignments)
        for aid, lab in enumerate(label_duplicates(inst)):
            tried += 1
            out = solve_labeled(lab, engine=engine)
            if isinstance(out, NoSolution):
                if first_violation is None:
                    first_violation = out.violation
                continue
            key = out.family_key()
            if key not in seen_keys:
                seen_keys.add(key)
                families.append((aid, out))
                if first_only:
                    break
    return SolveResult(families, tried, first_violation)
