"""Matching, greedy bounds and edge-disjoint request packing.

All routines are deterministic: ties are broken by the order of sorted vertex
and edge ids.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable

from .tree import Edge, Request, TreeInstance


@dataclass
class AuxGraph:
    """Simple undirected graph; each edge key maps to a label naming its source."""

    vertices: set = field(default_factory=set)
    edges: dict = field(default_factory=dict)  # frozenset({u, v}) -> label

    @classmethod
    def from_edges(cls, pairs: Iterable[tuple[Hashable, Hashable]],
                   vertices: Iterable[Hashable] = ()) -> "AuxGraph":
        g = cls(set(vertices))
        for u, v in pairs:
            g.add_edge(u, v)
        return g

    def add_vertex(self, v: Hashable) -> None:
        self.vertices.add(v)

    def add_edge(self, u: Hashable, v: Hashable, label: Any = None) -> None:
        if u == v:
            raise ValueError("self-loops are not allowed")
        key = frozenset((u, v))
        self.vertices.update((u, v))
        if key not in self.edges:
            self.edges[key] = label

    def neighbors(self) -> dict:
        nb: dict = {v: [] for v in self.vertices}
        for key in self.edges:
            u, v = tuple(key)
            nb[u].append(v)
            nb[v].append(u)
        return nb

    def max_degree(self) -> int:
        return max((len(ns) for ns in self.neighbors().values()), default=0)

    def without(self, drop: Iterable[Hashable]) -> "AuxGraph":
        drop = set(drop)
        g = AuxGraph(self.vertices - drop)
        g.edges = {k: lab for k, lab in self.edges.items() if not (k & drop)}
        return g


def _sort_key(v: Any) -> tuple:
    return (type(v).__name__, v) if not isinstance(v, tuple) else ("tuple", tuple(map(repr, v)))


def _indexed(g: AuxGraph) -> tuple[list, list[list[int]]]:
    verts = sorted(g.vertices, key=_sort_key)
    index = {v: i for i, v in enumerate(verts)}
    adj: list[list[int]] = [[] for _ in verts]
    for key in g.edges:
        u, v = tuple(key)
        adj[index[u]].append(index[v])
        adj[index[v]].append(index[u])
    for ns in adj:
        ns.sort()
    return verts, adj


def _edmonds(n: int, adj: list[list[int]]) -> list[int]:
    """Maximum cardinality matching by augmenting paths with blossom shrinking."""
    match = [-1] * n
    # greedy warm start
    for v in range(n):
        if match[v] == -1:
            for w in adj[v]:
                if match[w] == -1:
                    match[v], match[w] = w, v
                    break

    def augment(root: int) -> bool:
        parent = [-1] * n
        base = list(range(n))
        used = [False] * n
        used[root] = True
        queue = deque([root])

        def lca(a: int, b: int) -> int:
            seen = [False] * n
            while True:
                a = base[a]
                seen[a] = True
                if match[a] == -1:
                    break
                a = parent[match[a]]
            while True:
                b = base[b]
                if seen[b]:
                    return b
                b = parent[match[b]]

        def mark(v: int, b: int, child: int, blossom: list[bool]) -> None:
            while base[v] != b:
                blossom[base[v]] = blossom[base[match[v]]] = True
                parent[v] = child
                child = match[v]
                v = parent[match[v]]

        while queue:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and parent[match[to]] != -1):
                    cur = lca(v, to)
                    blossom = [False] * n
                    mark(v, cur, to, blossom)
                    mark(to, cur, v, blossom)
                    for i in range(n):
                        if blossom[base[i]]:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    if match[to] == -1:
                        # flip the alternating path ending at ``to``
                        while to != -1:
                            pv = parent[to]
                            nxt = match[pv]
                            match[to], match[pv] = pv, to
                            to = nxt
                        return True
                    used[match[to]] = True
                    queue.append(match[to])
        return False

    for v in range(n):
        if match[v] == -1 and adj[v]:
            augment(v)
    return match


def max_matching(g: AuxGraph) -> list[tuple]:
    """Maximum-cardinality matching, as a list of vertex pairs."""
    if not g.edges:
        return []
    verts, adj = _indexed(g)
    match = _edmonds(len(verts), adj)
    return [(verts[i], verts[j]) for i, j in enumerate(match) if j > i]


def matching_size(g: AuxGraph) -> int:
    return len(max_matching(g))


def is_matching(g: AuxGraph, pairs: Iterable[tuple]) -> bool:
    seen = set()
    for u, v in pairs:
        if frozenset((u, v)) not in g.edges or u in seen or v in seen:
            return False
        seen.update((u, v))
    return True


def greedy_matching(g: AuxGraph) -> list[tuple]:
    """Maximal matching by scanning edges in sorted order."""
    if not g.edges:
        raise ValueError("greedy matching needs at least one edge")
    taken = set()
    out = []
    for key in sorted(g.edges, key=lambda k: sorted(map(_sort_key, k))):
        u, v = sorted(key, key=_sort_key)
        if u not in taken and v not in taken:
            taken.update((u, v))
            out.append((u, v))
    return out


def greedy_independent_set(g: AuxGraph) -> list:
    nb = g.neighbors()
    blocked = set()
    out = []
    for v in sorted(g.vertices, key=_sort_key):
        if v not in blocked:
            out.append(v)
            blocked.add(v)
            blocked.update(nb[v])
    return out


def is_independent(g: AuxGraph, vs: Iterable) -> bool:
    vs = list(vs)
    s = set(vs)
    return len(s) == len(vs) and not any(len(k & s) == 2 for k in g.edges)


# -- edge-disjoint request packing ------------------------------------------

def max_edge_disjoint_requests(inst: TreeInstance) -> list[Request]:
    """Maximum set of pairwise edge-disjoint requests.

    Bottom-up over a rooted copy of the tree. For each node ``v`` the requests
    whose top node is ``v`` are matched against the child edges they occupy;
    a request crossing the edge above ``v`` stays available for higher nodes
    only if leaving that child edge busy does not shrink the local optimum.
    """
    if not inst.requests:
        return []
    parent, depth = inst.parent, inst.depth
    children: dict[int, list[int]] = {v: [] for v in inst.nodes}
    for v, p in parent.items():
        if p != -1:
            children[p].append(v)
    order = sorted(inst.nodes, key=lambda v: (-depth[v], v))

    def climb(v: int, d: int) -> int:
        while depth[v] > d:
            v = parent[v]
        return v

    top: dict[int, int] = {}
    legs: dict[int, tuple[int, ...]] = {}  # children of the top node used by each request
    by_top: dict[int, list[Request]] = {v: [] for v in inst.nodes}
    for r in inst.requests:
        ns = inst.request_nodes[r.id]
        t = min(ns, key=lambda v: depth[v])
        top[r.id] = t
        legs[r.id] = tuple(climb(w, depth[t] + 1) for w in (r.u, r.v) if w != t)
        by_top[t].append(r)
    # requests crossing the edge (v, parent(v)) that have an endpoint at v
    starting: dict[int, list[int]] = {v: [] for v in inst.nodes}
    for r in inst.requests:
        for w in (r.u, r.v):
            if w != top[r.id]:
                starting[w].append(r.id)

    avail: dict[int, set[int]] = {}
    local: dict[int, AuxGraph] = {}
    for v in order:
        g = AuxGraph({("c", c) for c in children[v]})
        for r in by_top[v]:
            if not all(r.id in avail[c] for c in legs[r.id]):
                continue
            if len(legs[r.id]) == 2:
                a, b = legs[r.id]
                key = frozenset((("c", a), ("c", b)))
                if key not in g.edges:
                    g.add_edge(("c", a), ("c", b), r.id)
            else:
                (c,) = legs[r.id]
                key = frozenset((("c", c), ("d", c)))
                if key not in g.edges:
                    g.add_edge(("c", c), ("d", c), r.id)
        local[v] = g
        up = set(starting[v])
        passing = [c for c in children[v] if any(top[rid] != v for rid in avail[c])]
        if passing:
            best = matching_size(g)
            for c in passing:
                if matching_size(g.without([("c", c), ("d", c)])) == best:
                    up.update(rid for rid in avail[c] if top[rid] != v)
        avail[v] = up

    chosen: list[int] = []
    root = order[-1]
    stack: list[tuple[int, int | None]] = [(root, None)]
    while stack:
        v, forced = stack.pop()
        g = local[v]
        blocked = None
        if forced is not None and not inst.request_by_id[forced].has(v):
            r = inst.request_by_id[forced]
            w = r.u if climb(r.u, depth[v]) == v and r.u != v else r.v
            blocked = climb(w, depth[v] + 1)
            g = g.without([("c", blocked), ("d", blocked)])
            stack.append((blocked, forced))
        used = {blocked}
        for pair in max_matching(g):
            rid = g.edges[frozenset(pair)]
            chosen.append(rid)
            for c in legs[rid]:
                used.add(c)
                stack.append((c, rid))
        for c in children[v]:
            if c not in used:
                stack.append((c, None))
    return sorted((inst.request_by_id[rid] for rid in chosen), key=lambda r: r.id)


def is_packing(inst: TreeInstance, rs: Iterable[Request]) -> bool:
    seen: set[Edge] = set()
    for r in rs:
        es = inst.request_edges[r.id]
        if es & seen:
            return False
        seen |= es
    return True
