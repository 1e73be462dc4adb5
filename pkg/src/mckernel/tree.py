"""Tree + request instances, path queries, node classification and rewrites.

Instances are value objects: every rewrite returns a new ``TreeInstance`` and
leaves its input untouched. Derived data (rooting, request paths, the node
partition) is computed lazily and cached on the instance.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class InstanceError(ValueError):
    """Raised for malformed trees, requests or rewrite arguments."""


class Verdict(str, enum.Enum):
    OPEN = "OPEN"
    TRUE = "TRUE"
    FALSE = "FALSE"


class NodeClass(str, enum.Enum):
    I1 = "I1"
    I2 = "I2"
    I3 = "I3"
    L1 = "L1"
    L2 = "L2"
    L2PRIME = "L2prime"
    L3 = "L3"


LEAF_CLASSES = frozenset({NodeClass.L1, NodeClass.L2, NodeClass.L2PRIME, NodeClass.L3})


@dataclass(frozen=True, order=True)
class Request:
    id: int
    u: int
    v: int

    @classmethod
    def make(cls, rid: int, a: int, b: int) -> "Request":
        if a == b:
            raise InstanceError(f"self-request on node {a}")
        return cls(rid, min(a, b), max(a, b))

    @property
    def pair(self) -> Edge:
        return (self.u, self.v)

    def other(self, x: int) -> int:
        return self.v if x == self.u else self.u

    def has(self, x: int) -> bool:
        return x == self.u or x == self.v


@dataclass(frozen=True)
class PathView:
    x: int
    y: int
    nodes: tuple[int, ...]
    edges: tuple[Edge, ...]
    internal_nodes: tuple[int, ...]
    internal_edges: tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True, eq=False)
class TreeInstance:
    nodes: frozenset[int]
    edges: frozenset[Edge]
    requests: tuple[Request, ...]
    k: int
    verdict: Verdict = Verdict.OPEN

    # -- structure -----------------------------------------------------

    @cached_property
    def adj(self) -> dict[int, tuple[int, ...]]:
        nbrs: dict[int, list[int]] = {v: [] for v in self.nodes}
        for a, b in self.edges:
            nbrs[a].append(b)
            nbrs[b].append(a)
        return {v: tuple(sorted(ns)) for v, ns in nbrs.items()}

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    @cached_property
    def leaves(self) -> frozenset[int]:
        if len(self.nodes) == 1:
            return frozenset()
        return frozenset(v for v, ns in self.adj.items() if len(ns) == 1)

    @cached_property
    def internal(self) -> frozenset[int]:
        return self.nodes - self.leaves

    def is_leaf(self, v: int) -> bool:
        return v in self.leaves

    def anchor(self, v: int) -> int:
        """The node itself if internal, else the node it hangs from."""
        if v in self.leaves and self.internal:
            return self.adj[v][0]
        return v

    @cached_property
    def _rooting(self) -> tuple[dict[int, int], dict[int, int]]:
        root = min(self.nodes)
        parent = {root: -1}
        depth = {root: 0}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in self.adj[v]:
                if w not in parent:
                    parent[w] = v
                    depth[w] = depth[v] + 1
                    queue.append(w)
        return parent, depth

    @property
    def parent(self) -> dict[int, int]:
        return self._rooting[0]

    @property
    def depth(self) -> dict[int, int]:
        return self._rooting[1]

    def node_path(self, x: int, y: int) -> list[int]:
        parent, depth = self._rooting
        left, right = [x], [y]
        a, b = x, y
        while depth[a] > depth[b]:
            a = parent[a]
            left.append(a)
        while depth[b] > depth[a]:
            b = parent[b]
            right.append(b)
        while a != b:
            a = parent[a]
            b = parent[b]
            left.append(a)
            right.append(b)
        right.pop()
        left.extend(reversed(right))
        return left

    # -- requests ------------------------------------------------------

    @cached_property
    def request_by_id(self) -> dict[int, Request]:
        return {r.id: r for r in self.requests}

    @cached_property
    def request_by_pair(self) -> dict[Edge, Request]:
        return {r.pair: r for r in self.requests}

    @cached_property
    def requests_at(self) -> dict[int, tuple[Request, ...]]:
        at: dict[int, list[Request]] = {v: [] for v in self.nodes}
        for r in self.requests:
            at[r.u].append(r)
            at[r.v].append(r)
        return {v: tuple(rs) for v, rs in at.items()}

    @cached_property
    def request_nodes(self) -> dict[int, tuple[int, ...]]:
        """Node sequence of each request path, from ``u`` to ``v``."""
        return {r.id: tuple(self.node_path(r.u, r.v)) for r in self.requests}

    @cached_property
    def request_edges(self) -> dict[int, frozenset[Edge]]:
        out = {}
        for rid, ns in self.request_nodes.items():
            out[rid] = frozenset(norm_edge(a, b) for a, b in zip(ns, ns[1:]))
        return out

    @cached_property
    def request_internal(self) -> dict[int, frozenset[int]]:
        internal = self.internal
        return {rid: frozenset(v for v in ns if v in internal)
                for rid, ns in self.request_nodes.items()}

    def length(self, r: Request) -> int:
        return len(self.request_nodes[r.id]) - 1

    @cached_property
    def potential(self) -> int:
        """Sum of request path lengths."""
        return sum(len(ns) - 1 for ns in self.request_nodes.values())

    @cached_property
    def edge_load(self) -> dict[Edge, int]:
        load = dict.fromkeys(self.edges, 0)
        for es in self.request_edges.values():
            for e in es:
                load[e] += 1
        return load

    @cached_property
    def is_caterpillar(self) -> bool:
        inner = self.internal
        for v in inner:
            if sum(1 for w in self.adj[v] if w in inner) > 2:
                return False
        return True

    @cached_property
    def partition(self) -> "NodePartition":
        return classify_nodes(self)

    def with_requests(self, requests: Iterable[Request], k: int | None = None) -> "TreeInstance":
        return TreeInstance(self.nodes, self.edges, tuple(sorted(requests)),
                            self.k if k is None else k, Verdict.OPEN)

    def __repr__(self) -> str:
        return (f"TreeInstance(n={len(self.nodes)}, edges={sorted(self.edges)}, "
                f"requests={[r.pair for r in self.requests]}, k={self.k}, "
                f"verdict={self.verdict.value})")


def _merge_requests(pairs: Iterable[tuple[int, int, int]]) -> tuple[Request, ...]:
    """Build requests from (id, a, b); duplicate pairs keep the smallest id."""
    best: dict[Edge, int] = {}
    for rid, a, b in pairs:
        key = norm_edge(a, b)
        if key not in best or rid < best[key]:
            best[key] = rid
    return tuple(sorted(Request(rid, p[0], p[1]) for p, rid in best.items()))


def build_instance(edge_list: Iterable[tuple[int, int]], request_list: Iterable[tuple[int, int]],
                   k: int, nodes: Iterable[int] | None = None) -> TreeInstance:
    """Validate and build an instance.

    ``nodes`` is only needed for the one-node tree (no edges); otherwise the
    node set is read off the edges.
    """
    edges = [tuple(e) for e in edge_list]
    node_set = set(nodes) if nodes is not None else set()
    for a, b in edges:
        if a == b:
            raise InstanceError(f"self-loop on node {a}")
        node_set.update((a, b))
    if not node_set:
        raise InstanceError("empty tree")
    norm = {norm_edge(a, b) for a, b in edges}
    if len(norm) != len(edges):
        raise InstanceError("cycle detected: repeated edge")
    if len(norm) > len(node_set) - 1:
        raise InstanceError("cycle detected")
    # union-find for cycles and connectivity
    root = {v: v for v in node_set}

    def find(v: int) -> int:
        while root[v] != v:
            root[v] = root[root[v]]
            v = root[v]
        return v

    for a, b in norm:
        ra, rb = find(a), find(b)
        if ra == rb:
            raise InstanceError("cycle detected")
        root[ra] = rb
    if len(norm) != len(node_set) - 1:
        raise InstanceError("tree is disconnected")
    if k < 0:
        raise InstanceError("budget must be non-negative")
    triples = []
    for rid, (a, b) in enumerate(request_list):
        if a == b:
            raise InstanceError(f"self-request on node {a}")
        for v in (a, b):
            if v not in node_set:
                raise InstanceError(f"unknown node id {v}")
        triples.append((rid, a, b))
    requests = _merge_requests(triples)
    if not requests:
        verdict = Verdict.TRUE
    elif k == 0:
        verdict = Verdict.FALSE
    else:
        verdict = Verdict.OPEN
    return TreeInstance(frozenset(node_set), frozenset(norm), requests, k, verdict)


def path_edges(inst: TreeInstance, x: int, y: int) -> PathView:
    if x == y:
        raise InstanceError("path endpoints must differ")
    for v in (x, y):
        if v not in inst.nodes:
            raise InstanceError(f"unknown node id {v}")
    ns = tuple(inst.node_path(x, y))
    es = tuple(norm_edge(a, b) for a, b in zip(ns, ns[1:]))
    internal = inst.internal
    return PathView(
        x, y, ns, es,
        tuple(v for v in ns if v in internal),
        tuple(e for e in es if e[0] in internal and e[1] in internal),
    )


def request_path(inst: TreeInstance, r: Request) -> PathView:
    return path_edges(inst, r.u, r.v)


# -- rewrites ----------------------------------------------------------------

def contraction_survivor(inst: TreeInstance, e: Edge) -> tuple[int, int]:
    """(survivor, removed) for contracting ``e``."""
    a, b = e
    a_int, b_int = a in inst.internal, b in inst.internal
    if a_int != b_int:
        return (a, b) if a_int else (b, a)
    return (min(a, b), max(a, b))


def contract_edge(inst: TreeInstance, e: Edge) -> TreeInstance:
    e = norm_edge(*e)
    if e not in inst.edges:
        raise InstanceError(f"edge {e} not in tree")
    s, t = contraction_survivor(inst, e)
    edges = set()
    for a, b in inst.edges:
        if (a, b) == e:
            continue
        a = s if a == t else a
        b = s if b == t else b
        edges.add(norm_edge(a, b))
    triples = []
    for r in inst.requests:
        u = s if r.u == t else r.u
        v = s if r.v == t else r.v
        if u != v:
            triples.append((r.id, u, v))
    return TreeInstance(inst.nodes - {t}, frozenset(edges), _merge_requests(triples),
                        inst.k, inst.verdict)


def delete_edge(inst: TreeInstance, e: Edge) -> TreeInstance:
    """Contract ``e`` and drop every request through it. Budget is left alone."""
    e = norm_edge(*e)
    if e not in inst.edges:
        raise InstanceError(f"edge {e} not in tree")
    kept = [r for r in inst.requests if e not in inst.request_edges[r.id]]
    return contract_edge(inst.with_requests(kept), e)


def drop_request(inst: TreeInstance, rid: int) -> TreeInstance:
    if rid not in inst.request_by_id:
        raise InstanceError(f"unknown request id {rid}")
    return inst.with_requests(r for r in inst.requests if r.id != rid)


# -- classification ----------------------------------------------------------

@dataclass(frozen=True)
class NodePartition:
    cls: Mapping[int, NodeClass]
    inner: frozenset[int]
    group: Mapping[int, int]  # leaf -> node it hangs from
    bad: frozenset[int]

    def of(self, c: NodeClass) -> frozenset[int]:
        return frozenset(v for v, cv in self.cls.items() if cv == c)

    def counts(self) -> dict[NodeClass, int]:
        out = dict.fromkeys(NodeClass, 0)
        for c in self.cls.values():
            out[c] += 1
        return out


def _bad_leaves(inst: TreeInstance) -> frozenset[int]:
    leaves = inst.leaves
    bad = set()
    for r in inst.requests:
        if r.u in leaves and r.v in leaves and inst.adj[r.u][0] == inst.adj[r.v][0]:
            bad.update(r.pair)
    return frozenset(bad)


def classify_nodes(inst: TreeInstance) -> NodePartition:
    internal = inst.internal
    bad = _bad_leaves(inst)
    group = {x: inst.adj[x][0] for x in inst.leaves}
    cls: dict[int, NodeClass] = {}
    if not internal:
        # one node, or a single edge: hub is the smaller id
        hub = min(inst.nodes)
        for v in inst.nodes:
            cls[v] = NodeClass.I1 if v == hub else NodeClass.L1
        group = {v: hub for v in inst.nodes if v != hub}
        return NodePartition(cls, frozenset(), group, bad)
    for v in internal:
        if len(internal) == 1:
            cls[v] = NodeClass.I1
            continue
        tdeg = sum(1 for w in inst.adj[v] if w in internal)
        cls[v] = NodeClass.I1 if tdeg <= 1 else NodeClass.I2 if tdeg == 2 else NodeClass.I3
    for x, f in group.items():
        fc = cls[f]
        if fc == NodeClass.I1:
            cls[x] = NodeClass.L1
        elif fc == NodeClass.I3:
            cls[x] = NodeClass.L3
        else:
            cls[x] = NodeClass.L2PRIME if x in bad else NodeClass.L2
    inner = frozenset(v for v in internal if all(w in internal for w in inst.adj[v]))
    return NodePartition(cls, inner, group, bad)


@dataclass(frozen=True)
class Caterpillar:
    nodes: frozenset[int]
    backbone: tuple[int, ...]
    extremities: tuple[int, int] | None
    trivial: bool


def caterpillar_decomposition(inst: TreeInstance,
                              part: NodePartition | None = None) -> list[Caterpillar]:
    """Maximal components of T - I3 - L3, ordered by smallest member."""
    part = part or inst.partition
    if not inst.internal:
        return [Caterpillar(inst.nodes, tuple(sorted(inst.nodes))[:1], None, True)]
    drop = {NodeClass.I3, NodeClass.L3}
    keep = {v for v in inst.nodes if part.cls[v] not in drop}
    seen: set[int] = set()
    out = []
    for start in sorted(keep):
        if start in seen:
            continue
        comp = {start}
        queue = [start]
        while queue:
            v = queue.pop()
            for w in inst.adj[v]:
                if w in keep and w not in comp:
                    comp.add(w)
                    queue.append(w)
        seen |= comp
        out.append(_caterpillar_of(inst, frozenset(comp)))
    return out


def _order_path(inst: TreeInstance, members: set[int]) -> tuple[int, ...]:
    if not members:
        return ()
    nb = {v: [w for w in inst.adj[v] if w in members] for v in members}
    ends = sorted(v for v, ws in nb.items() if len(ws) <= 1)
    order = [ends[0]]
    prev = None
    while True:
        nxt = [w for w in nb[order[-1]] if w != prev]
        if not nxt:
            break
        prev = order[-1]
        order.append(nxt[0])
    return tuple(order)


def _caterpillar_of(inst: TreeInstance, comp: frozenset[int]) -> Caterpillar:
    backbone = _order_path(inst, {v for v in comp if v in inst.internal})
    cdeg = {v: sum(1 for w in inst.adj[v] if w in comp) for v in comp}
    c_internal = [v for v in backbone if cdeg[v] >= 2]
    if len(c_internal) < 2:
        return Caterpillar(comp, backbone, None, True)
    return Caterpillar(comp, backbone, (c_internal[0], c_internal[-1]), False)


def caterpillar_of_node(inst: TreeInstance, v: int) -> Caterpillar | None:
    for c in inst_caterpillars(inst):
        if v in c.nodes:
            return c
    return None


def inst_caterpillars(inst: TreeInstance) -> list[Caterpillar]:
    cache = inst.__dict__.get("_caterpillars")
    if cache is None:
        cache = caterpillar_decomposition(inst)
        inst.__dict__["_caterpillars"] = cache
    return cache


# -- predicates --------------------------------------------------------------

@dataclass(frozen=True)
class RequestRelation:
    dominates: bool
    common_factor: frozenset[Edge]
    endpoint_disjoint: bool
    disjoint: bool


def request_predicates(inst: TreeInstance, r1: Request, r2: Request) -> RequestRelation:
    e1, e2 = inst.request_edges[r1.id], inst.request_edges[r2.id]
    common = e1 & e2
    return RequestRelation(
        dominates=inst.request_internal[r1.id] >= inst.request_internal[r2.id],
        common_factor=common,
        endpoint_disjoint=len({r1.u, r1.v, r2.u, r2.v}) == 4,
        disjoint=not common,
    )


def directions_from(inst: TreeInstance, x: int) -> dict[int, Edge]:
    """Direction edge of each request at ``x``; unit requests from a leaf are skipped."""
    leaf = x in inst.leaves
    out = {}
    for r in inst.requests_at[x]:
        ns = inst.request_nodes[r.id]
        if ns[0] != x:
            ns = ns[::-1]
        if leaf:
            if len(ns) < 3:
                continue
            out[r.id] = norm_edge(ns[1], ns[2])
        else:
            out[r.id] = norm_edge(ns[0], ns[1])
    return out


def quasi_r_neighbors(inst: TreeInstance, x: int) -> frozenset[int]:
    if x not in inst.leaves:
        raise InstanceError(f"node {x} is not a leaf")
    return frozenset(inst.anchor(r.other(x)) for r in inst.requests_at[x])


def minimal_requests(inst: TreeInstance, x: int) -> list[Request]:
    """Requests at ``x`` whose internal path is inclusion-minimal.

    Requests sharing an internal path are represented by the smallest id.
    """
    rs = sorted(inst.requests_at[x], key=lambda r: r.id)
    paths = inst.request_internal
    chosen: dict[frozenset[int], Request] = {}
    for r in rs:
        chosen.setdefault(paths[r.id], r)
    out = []
    for p, r in chosen.items():
        if not any(q < p for q in chosen if q is not p):
            out.append(r)
    return sorted(out)


def branch_sides(inst: TreeInstance, f: int) -> dict[int, int]:
    """Map every node other than ``f`` to the neighbour of ``f`` it hangs below."""
    side = {}
    for n in inst.adj[f]:
        side[n] = n
        stack = [n]
        while stack:
            v = stack.pop()
            for w in inst.adj[v]:
                if w != f and w not in side:
                    side[w] = n
                    stack.append(w)
    return side


# -- wingspans ---------------------------------------------------------------

@dataclass(frozen=True)
class Wingspan:
    leaf: int
    nodes: frozenset[int]          # internal window
    pendant: frozenset[int]        # leaves rooted at the window
    size: int                      # pendant L2-leaves
    bounds: tuple[int, int]        # boundary nodes of the window
    neighbors: tuple[int, int] | None = None  # R-neighbours spanning it, general mode

    @property
    def subcaterpillar(self) -> frozenset[int]:
        return self.nodes | self.pendant


def _window(inst: TreeInstance, x: int, nodes: frozenset[int], bounds: tuple[int, int],
            neighbors: tuple[int, int] | None = None) -> Wingspan:
    part = inst.partition
    pendant = frozenset(y for v in nodes for y in inst.adj[v] if y in inst.leaves)
    size = sum(1 for y in pendant if part.cls[y] == NodeClass.L2)
    return Wingspan(x, nodes, pendant, size, bounds, neighbors)


def _check_l2(inst: TreeInstance, x: int) -> int:
    if x not in inst.nodes or inst.partition.cls[x] != NodeClass.L2:
        raise InstanceError(f"node {x} is not an L2-leaf")
    return inst.adj[x][0]


def caterpillar_wingspan(inst: TreeInstance, x: int) -> Wingspan:
    """Window between the closest quasi-R-neighbours of ``x`` on either side.

    A side with no quasi-R-neighbour contributes ``f(x)`` as its boundary.
    """
    f = _check_l2(inst, x)
    side = branch_sides(inst, f)
    n1, n2 = sorted(w for w in inst.adj[f] if w in inst.internal)
    closest: dict[int, tuple[int, int]] = {}
    for y in quasi_r_neighbors(inst, x):
        s = side.get(y)
        if y == f or s not in (n1, n2):
            continue
        key = (len(inst.node_path(f, y)), y)
        if s not in closest or key < closest[s]:
            closest[s] = key
    lo = closest[n1][1] if n1 in closest else f
    hi = closest[n2][1] if n2 in closest else f
    nodes = frozenset(v for v in inst.node_path(lo, hi) if v in inst.internal)
    return _window(inst, x, nodes, (lo, hi))


def general_wingspans(inst: TreeInstance, x: int) -> list[Wingspan]:
    """One wingspan per pair of closest R-neighbours on the two sides of ``f(x)``."""
    f = _check_l2(inst, x)
    side = branch_sides(inst, f)
    n1, n2 = sorted(w for w in inst.adj[f] if w in inst.internal)
    mins = minimal_requests(inst, x)
    left = [r for r in mins if side.get(r.other(x)) == n1]
    right = [r for r in mins if side.get(r.other(x)) == n2]
    out = []
    for ra in left:
        for rb in right:
            nodes = inst.request_internal[ra.id] | inst.request_internal[rb.id]
            out.append(_window(inst, x, nodes,
                               (inst.anchor(ra.other(x)), inst.anchor(rb.other(x))),
                               (ra.other(x), rb.other(x))))
    return out


def wingspan(inst: TreeInstance, x: int, mode: str = "caterpillar") -> Wingspan | list[Wingspan]:
    if mode == "caterpillar":
        return caterpillar_wingspan(inst, x)
    if mode == "general":
        return general_wingspans(inst, x)
    raise ValueError(f"unknown mode {mode!r}")
