"""Digest-graph construction and structural screening.

The digest graph joins every labeled C-element to the A-fragment and
B-fragment that contain it, so A/B nodes carry fragments and C-nodes
carry sub-fragments.  An instance admits a left-to-right layout exactly
when this graph is a tree whose longest path carries everything else as
danglers (2-node stubs: one C-node plus one single-piece fragment).
check_structure decides that, producing either the diameter plus the
dangler groups or a violation witness.

Internally the graph is contracted: A/B fragments are the nodes and
each C-element is an edge between its two owners.  Two engines compute
the same result: a plain breadth-first one for small graphs and an
array-based one (numpy + scipy) that recognizes the clean caterpillar
shape directly and falls back to the plain engine on anything else.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .instance import LabeledInstance

# Below this many contracted nodes the plain engine wins on overhead.
_VECTOR_MIN_NODES = 20_000

NOT_CONNECTED = "NOT_CONNECTED"
HAS_CYCLE = "HAS_CYCLE"
DEEP_SUBTREE = "DEEP_SUBTREE"


class NodeRef(NamedTuple):
    """A node of the digest graph: kind 'A', 'B' or 'C' plus 0-based index."""

    kind: str
    index: int


@dataclass(frozen=True, eq=False)
class DigestGraph:
    """Immutable digest graph over a LabeledInstance."""

    labeled: LabeledInstance

    @property
    def p(self) -> int:
        return self.labeled.base.p

    @property
    def q(self) -> int:
        return self.labeled.base.q

    @property
    def n(self) -> int:
        return self.labeled.n

    @property
    def a_owners(self) -> np.ndarray:
        return self.labeled.a_owners

    @property
    def b_owners(self) -> np.ndarray:
        return self.labeled.b_owners

    @property
    def node_count(self) -> int:
        return self.p + self.q + self.n

    @property
    def edge_count(self) -> int:
        return 2 * self.n

    def _incidence(self):
        cached = self.__dict__.get("_incidence_cache")
        if cached is None:
            cached = (_csr_groups(self.a_owners, self.p), _csr_groups(self.b_owners, self.q))
            object.__setattr__(self, "_incidence_cache", cached)
        return cached

    def a_incident(self, i: int) -> tuple[int, ...]:
        """C-indices contained in A-fragment i."""
        offsets, order = self._incidence()[0]
        return tuple(order[offsets[i]:offsets[i + 1]].tolist())

    def b_incident(self, j: int) -> tuple[int, ...]:
        offsets, order = self._incidence()[1]
        return tuple(order[offsets[j]:offsets[j + 1]].tolist())

    def a_degrees(self) -> np.ndarray:
        return np.bincount(self.a_owners, minlength=self.p)

    def b_degrees(self) -> np.ndarray:
        return np.bincount(self.b_owners, minlength=self.q)

    def node_name(self, ref: NodeRef) -> str:
        if ref.kind == "A":
            return f"A{ref.index + 1}"
        if ref.kind == "B":
            return f"B{ref.index + 1}"
        lab = self.labeled
        return f"C{int(lab.values[ref.index])}#{int(lab.copy_ids[ref.index])}"


def _csr_groups(owners: np.ndarray, count: int):
    order = np.argsort(owners, kind="stable")
    offsets = np.concatenate(([0], np.cumsum(np.bincount(owners, minlength=count))))
    return offsets, order


def build_graph(inst: LabeledInstance) -> DigestGraph:
    """Wrap a labeled instance as its digest graph (O(n), arrays shared)."""
    p, q, n = inst.base.p, inst.base.q, inst.n
    if n != p + q - 1:
        raise ValueError(f"|C| = {n} but p + q - 1 = {p + q - 1}; instance is inconsistent")
    if n and (int(inst.a_owners.min()) < 0 or int(inst.a_owners.max()) >= p
              or int(inst.b_owners.min()) < 0 or int(inst.b_owners.max()) >= q):
        raise ValueError("owner index out of range")
    return DigestGraph(inst)


def export_edges(g: DigestGraph) -> str:
    """Debug dump: one edge per line with stable node names."""
    lines = []
    ao = g.a_owners.tolist()
    bo = g.b_owners.tolist()
    for k in range(g.n):
        cname = g.node_name(NodeRef("C", k))
        lines.append(f"A{ao[k] + 1} {cname}")
        lines.append(f"B{bo[k] + 1} {cname}")
    return "\n".join(lines) + "\n" if lines else ""


@dataclass(frozen=True)
class StructureViolation:
    """Why the graph admits no layout, with a witness node sequence."""

    kind: str                      # NOT_CONNECTED, HAS_CYCLE or DEEP_SUBTREE
    nodes: tuple[NodeRef, ...]     # unreachable node / cycle / hanging-subtree root


@dataclass(eq=False)
class _TreePayload:
    """Diameter decomposition of a tree-shaped digest graph.

    ``spine`` lists the contracted interior nodes of the diameter in
    listing order; ``links`` the C-edges between consecutive spine
    nodes.  Pendant C-edges (exactly one leaf endpoint) are sorted by
    (spine position, value, copy) and include the two diameter
    terminals, identified by ``start_c``/``end_c``.
    """

    single: bool
    spine: np.ndarray
    links: np.ndarray
    pend_c: np.ndarray
    pend_pos: np.ndarray
    pend_leaf: np.ndarray
    start_leaf: int
    start_c: int
    end_leaf: int
    end_c: int


def _contracted_ref(p: int, node: int) -> NodeRef:
    return NodeRef("A", node) if node < p else NodeRef("B", node - p)


@dataclass(eq=False)
class StructureVerdict:
    """Outcome of the tree-plus-danglers screening."""

    is_tree: bool
    violation: StructureViolation | None
    _graph: DigestGraph
    _payload: _TreePayload | None

    @property
    def diameter(self) -> tuple[NodeRef, ...] | None:
        """Diameter as a node sequence (present iff the graph is a tree)."""
        if not self.is_tree:
            return None
        cached = self.__dict__.get("_diameter_cache")
        if cached is None:
            cached = self._build_diameter()
            self.__dict__["_diameter_cache"] = cached
        return cached

    def _build_diameter(self) -> tuple[NodeRef, ...]:
        pay = self._payload
        p = self._graph.p
        if pay.single:
            return (NodeRef("A", 0), NodeRef("C", 0), NodeRef("B", 0))
        out = [_contracted_ref(p, pay.start_leaf), NodeRef("C", int(pay.start_c))]
        links = pay.links.tolist()
        for i, s in enumerate(pay.spine.tolist()):
            out.append(_contracted_ref(p, s))
            if i < len(links):
                out.append(NodeRef("C", links[i]))
        out.append(NodeRef("C", int(pay.end_c)))
        out.append(_contracted_ref(p, pay.end_leaf))
        return tuple(out)

    @property
    def diameter_node_count(self) -> int | None:
        if not self.is_tree:
            return None
        pay = self._payload
        return 3 if pay.single else 2 * len(pay.spine) + 3

    @property
    def dangler_count(self) -> int | None:
        if not self.is_tree or self.violation is not None:
            return None
        pay = self._payload
        return 0 if pay.single else len(pay.pend_c) - 2

    @property
    def danglers(self) -> dict[NodeRef, tuple[tuple[NodeRef, NodeRef], ...]] | None:
        """Dangler pairs (C-node, leaf) grouped by diameter node; present
        iff there is no violation."""
        if self.violation is not None or not self.is_tree:
            return None
        cached = self.__dict__.get("_danglers_cache")
        if cached is None:
            cached = self._build_danglers()
            self.__dict__["_danglers_cache"] = cached
        return cached

    def _build_danglers(self):
        pay = self._payload
        p = self._graph.p
        out: dict[NodeRef, tuple[tuple[NodeRef, NodeRef], ...]] = {}
        if pay.single:
            return out
        spine = pay.spine.tolist()
        terminals = {int(pay.start_c), int(pay.end_c)}
        groups: dict[int, list[tuple[NodeRef, NodeRef]]] = {}
        for c, pos, leaf in zip(pay.pend_c.tolist(), pay.pend_pos.tolist(),
                                pay.pend_leaf.tolist()):
            if c in terminals:
                continue
            groups.setdefault(pos, []).append((NodeRef("C", c), _contracted_ref(p, leaf)))
        for pos in sorted(groups):
            out[_contracted_ref(p, spine[pos])] = tuple(groups[pos])
        return out


# --- plain engine ----------------------------------------------------------

def _adjacency(g: DigestGraph):
    p = g.p
    nn = p + g.q
    adj: list[list[tuple[int, int]]] = [[] for _ in range(nn)]
    ao = g.a_owners.tolist()
    bo = g.b_owners.tolist()
    for k in range(g.n):
        u = ao[k]
        w = p + bo[k]
        adj[u].append((w, k))
        adj[w].append((u, k))
    return adj


def _bfs(adj, start, want_cycle=False):
    nn = len(adj)
    dist = [-1] * nn
    par = [-1] * nn
    pare = [-1] * nn
    dist[start] = 0
    order = [start]
    head = 0
    cycle = None
    while head < len(order):
        u = order[head]
        head += 1
        du = dist[u] + 1
        for w, k in adj[u]:
            if dist[w] < 0:
                dist[w] = du
                par[w] = u
                pare[w] = k
                order.append(w)
            elif want_cycle and cycle is None and k != pare[u] and k != pare[w]:
                cycle = (u, w, k)
    return dist, par, pare, order, cycle


def _extract_cycle(g: DigestGraph, par, pare, u, w, k) -> tuple[NodeRef, ...]:
    p = g.p
    ancestors = set()
    x = u
    while x != -1:
        ancestors.add(x)
        x = par[x]
    w_chain = []
    x = w
    while x not in ancestors:
        w_chain.append((x, pare[x]))
        x = par[x]
    lca = x
    out: list[NodeRef] = []
    x = u
    while x != lca:
        out.append(_contracted_ref(p, x))
        out.append(NodeRef("C", pare[x]))
        x = par[x]
    out.append(_contracted_ref(p, lca))
    for node, edge in reversed(w_chain):
        out.append(NodeRef("C", edge))
        out.append(_contracted_ref(p, node))
    out.append(NodeRef("C", k))  # the edge closing w back to u
    return tuple(out)


def _check_python(g: DigestGraph):
    """Returns a _TreePayload, a StructureViolation, or a (payload,
    violation) pair for a tree with a deep subtree."""
    p, q, n = g.p, g.q, g.n
    if n == 1:
        return _TreePayload(True, np.empty(0, np.int64), np.empty(0, np.int64),
                            np.empty(0, np.int64), np.empty(0, np.int64),
                            np.empty(0, np.int64), 0, 0, p, 0)
    nn = p + q
    adj = _adjacency(g)

    dist0, par0, pare0, order0, cycle = _bfs(adj, 0, want_cycle=True)
    if cycle is not None:
        u, w, k = cycle
        return StructureViolation(HAS_CYCLE, _extract_cycle(g, par0, pare0, u, w, k))
    if len(order0) < nn:
        visited = set(order0)
        missing = min(x for x in range(nn) if x not in visited)
        return StructureViolation(NOT_CONNECTED, (_contracted_ref(p, missing),))

    # Tree (node count exceeds edge count by one).  Two-pass diameter,
    # farthest ties broken toward the smallest node id.
    start = next(u for u in range(nn) if len(adj[u]) == 1)
    dist1 = _bfs(adj, start)[0]
    far = max(dist1)
    e1 = dist1.index(far)
    dist2, par2, pare2, _, _ = _bfs(adj, e1)
    far2 = max(dist2)
    e2 = dist2.index(far2)

    path = [e2]
    edges = []
    x = e2
    while x != e1:
        edges.append(pare2[x])
        x = par2[x]
        path.append(x)

    spine = path[1:-1]
    pos = {s: i for i, s in enumerate(spine)}
    on_diam = set(path)
    diam_edges = set(edges)

    pendants = []
    deep: list[int] = []
    for k in range(n):
        if k in diam_edges:
            continue
        u = int(g.a_owners[k])
        w = p + int(g.b_owners[k])
        u_on = u in on_diam
        w_on = w in on_diam
        if u_on and w_on:
            raise AssertionError("off-diameter edge between diameter nodes in a tree")
        if not u_on and not w_on:
            continue  # deep interior; its subtree root is caught below
        att, leaf = (u, w) if u_on else (w, u)
        if len(adj[leaf]) != 1:
            deep.append(k)
        else:
            pendants.append((pos[att], k, leaf))

    complete = len(edges) + len(pendants) == n
    # the two diameter terminals join the end blocks like any other pendant
    pendants.append((0, edges[0], e2))
    pendants.append((len(spine) - 1, edges[-1], e1))
    payload = _payload_from_parts(g, spine, edges, pendants, e2, e1)
    if deep:
        return payload, StructureViolation(DEEP_SUBTREE, (NodeRef("C", min(deep)),))
    if not complete:
        raise AssertionError("node accounting failed on a clean tree")
    return payload


def _payload_from_parts(g, spine, edges, pendants, e2, e1):
    lab = g.labeled
    pendants.sort(key=lambda t: (t[0], int(lab.values[t[1]]), int(lab.copy_ids[t[1]])))
    return _TreePayload(
        False,
        np.asarray(spine, dtype=np.int64),
        np.asarray(edges[1:-1], dtype=np.int64),
        np.asarray([k for _, k, _ in pendants], dtype=np.int64),
        np.asarray([i for i, _, _ in pendants], dtype=np.int64),
        np.asarray([leaf for _, _, leaf in pendants], dtype=np.int64),
        e2, edges[0], e1, edges[-1],
    )


# --- array engine ----------------------------------------------------------

def _check_vector(g: DigestGraph):
    """Fast accept for clean caterpillars; None means fall back."""
    from scipy.sparse import csgraph, csr_matrix

    p, q, n = g.p, g.q, g.n
    ao = g.a_owners
    bo = g.b_owners
    deg_a = np.bincount(ao, minlength=p)
    deg_b = np.bincount(bo, minlength=q)
    leaf_a = deg_a == 1
    leaf_b = deg_b == 1
    a_leaf_side = leaf_a[ao]
    b_leaf_side = leaf_b[bo]
    pend_mask = a_leaf_side ^ b_leaf_side
    link_mask = ~(a_leaf_side | b_leaf_side)
    if int(pend_mask.sum()) + int(link_mask.sum()) != n:
        return None  # some C joins two leaves: not a clean caterpillar

    spine_a = ~leaf_a
    spine_b = ~leaf_b
    n_spine = int(spine_a.sum()) + int(spine_b.sum())
    pend_idx = np.flatnonzero(pend_mask)
    pend_att = np.where(a_leaf_side[pend_idx], bo[pend_idx] + p, ao[pend_idx])
    pend_leaf = np.where(a_leaf_side[pend_idx], ao[pend_idx], bo[pend_idx] + p)

    links = np.flatnonzero(link_mask)
    m = len(links)
    if n_spine == 0:
        return None
    if m != n_spine - 1:
        return None

    if m == 0:
        order = np.flatnonzero(np.concatenate((spine_a, spine_b)))
        if len(order) != 1 or not (pend_att == order[0]).all():
            return None
        spine_nodes = order
    else:
        lu = ao[links]
        lw = bo[links] + p
        sdeg = np.bincount(lu, minlength=p + q) + np.bincount(lw, minlength=p + q)
        spine_mask = np.concatenate((spine_a, spine_b))
        if (sdeg[~spine_mask] != 0).any():
            return None
        sd = sdeg[spine_mask]
        ends = np.flatnonzero(np.concatenate((spine_a, spine_b)))[sd == 1]
        if len(ends) != 2 or sd.max() > 2 or (sd == 0).any():
            return None
        rows = np.concatenate((lu, lw))
        cols = np.concatenate((lw, lu))
        mat = csr_matrix((np.ones(2 * m, dtype=np.int8), (rows, cols)),
                         shape=(p + q, p + q))
        spine_nodes = csgraph.breadth_first_order(mat, int(ends.min()),
                                                  directed=False,
                                                  return_predecessors=False)
        if len(spine_nodes) != n_spine:
            return None
        spine_nodes = spine_nodes.astype(np.int64)

    npos = np.full(p + q, -1, dtype=np.int64)
    npos[spine_nodes] = np.arange(n_spine)
    if (npos[pend_att] < 0).any():
        return None
    # links must step between consecutive positions exactly once each
    if m:
        lo = np.minimum(npos[ao[links]], npos[bo[links] + p])
        hi = np.maximum(npos[ao[links]], npos[bo[links] + p])
        if (hi - lo != 1).any():
            return None
        link_order = np.argsort(lo, kind="stable")
        if not np.array_equal(lo[link_order], np.arange(m)):
            return None
        links = links[link_order]

    pend_pos = npos[pend_att]
    lab = g.labeled
    sorter = np.lexsort((lab.copy_ids[pend_idx], lab.values[pend_idx], pend_pos))
    pend_idx = pend_idx[sorter]
    pend_pos = pend_pos[sorter]
    pend_leaf = pend_leaf[sorter]

    # Two-pass endpoint choice, replicated positionally: the search from
    # the smallest leaf reaches a far-end pendant leaf first (e1), the
    # second pass lands on the opposite end (e2); listing runs e2 -> e1.
    mlast = n_spine - 1
    lstar_i = int(np.argmin(pend_leaf))
    jstar = int(pend_pos[lstar_i])
    lstar = int(pend_leaf[lstar_i])

    def min_leaf_at(posn, exclude=-1):
        cand = pend_leaf[(pend_pos == posn) & (pend_leaf != exclude)]
        return int(cand.min()) if len(cand) else None

    if mlast == 0:
        e1 = min_leaf_at(0, exclude=lstar)
        if e1 is None:
            return None
        e2 = min_leaf_at(0, exclude=e1)
        if e2 is None:
            return None
        j1 = j2 = 0
    else:
        d_left = jstar + 2
        d_right = (mlast - jstar) + 2
        if d_left > d_right:
            cands = [min_leaf_at(0, exclude=lstar)]
        elif d_right > d_left:
            cands = [min_leaf_at(mlast, exclude=lstar)]
        else:
            cands = [min_leaf_at(0, exclude=lstar), min_leaf_at(mlast, exclude=lstar)]
        cands = [c for c in cands if c is not None]
        if not cands:
            return None
        e1 = min(cands)
        j1 = 0 if (pend_leaf[pend_pos == 0] == e1).any() else mlast
        j2 = mlast - j1
        e2 = min_leaf_at(j2, exclude=e1)
        if e2 is None:
            return None

    if mlast > 0 and j2 != 0:
        # flip so the listing starts at e2's end
        spine_nodes = spine_nodes[::-1].copy()
        links = links[::-1].copy()
        pend_pos = mlast - pend_pos
        sorter = np.lexsort((lab.copy_ids[pend_idx], lab.values[pend_idx], pend_pos))
        pend_idx = pend_idx[sorter]
        pend_pos = pend_pos[sorter]
        pend_leaf = pend_leaf[sorter]

    start_c = int(pend_idx[pend_leaf == e2][0])
    end_c = int(pend_idx[pend_leaf == e1][0])
    return _TreePayload(False, spine_nodes, links, pend_idx, pend_pos, pend_leaf,
                        int(e2), start_c, int(e1), end_c)


def check_structure(g: DigestGraph, *, engine: str = "auto") -> StructureVerdict:
    """Decide tree-ness and the dangler condition on one diameter.

    The graph always has one more node than edges, so a single
    connectivity argument separates trees from everything else; on
    trees, every subtree hanging off the diameter must be a dangler.
    Engines: "auto" picks by size, "plain" and "vector" force one.
    """
    if engine not in ("auto", "plain", "vector"):
        raise ValueError(f"unknown engine {engine!r}")
    result = None
    if engine == "vector" or (engine == "auto" and g.p + g.q >= _VECTOR_MIN_NODES):
        if g.n > 1:
            result = _check_vector(g)
    if result is None:
        result = _check_python(g)

    if isinstance(result, StructureViolation):
        is_tree = result.kind == DEEP_SUBTREE
        return StructureVerdict(is_tree, result, g, None)
    if isinstance(result, tuple):
        payload, violation = result
        return StructureVerdict(True, violation, g, payload)
    return StructureVerdict(True, None, g, result)
