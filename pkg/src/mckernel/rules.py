"""Detection and application of the reduction rules.

Each ``ruleN_*`` function inspects an instance and returns the first
application it finds (pivots scanned in ascending id) or ``None``. Detection
never mutates; :func:`apply_rule` produces the rewritten instance.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Callable, Iterator

from .engines import AuxGraph, is_packing, max_edge_disjoint_requests, max_matching
from .tree import (
    Caterpillar,
    Edge,
    NodeClass,
    Request,
    TreeInstance,
    Verdict,
    branch_sides,
    caterpillar_of_node,
    caterpillar_wingspan,
    contract_edge,
    delete_edge,
    directions_from,
    drop_request,
    general_wingspans,
    minimal_requests,
    norm_edge,
)


class ModeError(ValueError):
    """A caterpillar-only rule or driver was used on a non-caterpillar."""


class Action(str, enum.Enum):
    DELETE_EDGE = "delete_edge_and_decrement_k"
    CONTRACT = "contract_edge"
    DROP = "drop_request"
    FALSE = "declare_false"


@dataclass(frozen=True)
class RuleApplication:
    rule: str
    action: Action
    pivot: int | None = None       # node x, or the request R the rule is about
    edge: Edge | None = None       # edge to delete/contract
    request: int | None = None     # request to drop
    witness: tuple = ()
    window: frozenset[int] = field(default_factory=frozenset)

    def describe(self) -> str:
        parts = [self.rule, self.action.value]
        if self.pivot is not None:
            parts.append(f"pivot={self.pivot}")
        if self.edge is not None:
            parts.append(f"edge={self.edge[0]},{self.edge[1]}")
        if self.request is not None:
            parts.append(f"request={self.request}")
        return " ".join(parts)


def false_instance() -> TreeInstance:
    return TreeInstance(frozenset({0, 1}), frozenset({(0, 1)}), (Request(0, 0, 1),), 0,
                        Verdict.FALSE)


def true_instance() -> TreeInstance:
    return TreeInstance(frozenset({0}), frozenset(), (), 0, Verdict.TRUE)


# -- (0) unit request ---------------------------------------------------------

def rule0_unit_request(inst: TreeInstance) -> RuleApplication | None:
    for r in inst.requests:
        if inst.length(r) == 1:
            return RuleApplication("rule0", Action.DELETE_EDGE, pivot=r.id, edge=r.pair)
    return None


# -- (1) disjoint requests ----------------------------------------------------

def rule1_disjoint_requests(inst: TreeInstance) -> RuleApplication | None:
    if len(inst.requests) <= inst.k:
        return None
    packing = max_edge_disjoint_requests(inst)
    if len(packing) >= inst.k + 1:
        return RuleApplication("rule1", Action.FALSE, witness=tuple(r.id for r in packing))
    return None


# -- (2) unique direction -----------------------------------------------------

def rule2_candidates(inst: TreeInstance) -> Iterator[tuple[int, Edge]]:
    """Every (pivot, edge) Rule 2 allows, pivots ascending."""
    if not inst.internal:
        return
    inner = inst.partition.inner
    load = inst.edge_load
    for x in sorted(inst.nodes):
        if x in inst.leaves:
            if any(inst.length(r) == 1 for r in inst.requests_at[x]):
                continue
            if len(set(directions_from(inst, x).values())) <= 1:
                yield x, norm_edge(x, inst.adj[x][0])
        elif x in inner and inst.degree(x) == 2:
            used = set(directions_from(inst, x).values())
            if len(used) > 1:
                continue
            free = [norm_edge(x, w) for w in inst.adj[x] if norm_edge(x, w) not in used]
            free.sort(key=lambda e: (load[e] == 0, e))
            yield x, free[0]


def rule2_unique_direction(inst: TreeInstance) -> RuleApplication | None:
    for x, e in rule2_candidates(inst):
        return RuleApplication("rule2", Action.CONTRACT, pivot=x, edge=e)
    return None


def neutral_rule2(inst: TreeInstance) -> RuleApplication | None:
    """First Rule 2 contraction of an edge that lies on no request."""
    load = inst.edge_load
    for x, e in rule2_candidates(inst):
        if load[e] == 0:
            return RuleApplication("rule2", Action.CONTRACT, pivot=x, edge=e)
    return None


# -- (3) inclusion ------------------------------------------------------------

def rule3_inclusion(inst: TreeInstance) -> RuleApplication | None:
    paths = inst.request_edges
    by_len = sorted(inst.requests, key=lambda r: (len(paths[r.id]), r.id))
    for big in inst.requests:
        pb = paths[big.id]
        for small in by_len:
            if len(paths[small.id]) >= len(pb):
                break
            if paths[small.id] < pb:
                return RuleApplication("rule3", Action.DROP, pivot=small.id, request=big.id,
                                       witness=(small.id,))
    return None


# -- (4) common factor --------------------------------------------------------

def common_factor_family(inst: TreeInstance, R: Request) -> list[int]:
    """Largest family of requests meeting R whose pairwise common factors lie in R.

    Requests contained in R are free; the rest leave R through one or two
    edges adjacent to it, and two members may not leave through the same edge.
    One-exit edges are always worth taking. The two-exit requests are then
    packed by a matching on the remaining exit edges.
    """
    paths = inst.request_edges
    r_edges = paths[R.id]
    r_nodes = set(inst.request_nodes[R.id])
    inside: list[int] = []
    single: dict[Edge, int] = {}
    double: list[tuple[Edge, Edge, int]] = []
    for q in inst.requests:
        if q.id == R.id:
            continue
        q_edges = paths[q.id]
        if not (q_edges & r_edges):
            continue
        exits = [e for e in q_edges - r_edges if e[0] in r_nodes or e[1] in r_nodes]
        if not exits:
            inside.append(q.id)
        elif len(exits) == 1:
            single.setdefault(exits[0], q.id)
        else:
            a, b = sorted(exits)
            double.append((a, b, q.id))
    g = AuxGraph()
    for a, b, rid in double:
        if a not in single and b not in single:
            g.add_edge(a, b, rid)
    matched = [g.edges[frozenset(p)] for p in max_matching(g)]
    return sorted(inside + list(single.values()) + matched)


def rule4_common_factor(inst: TreeInstance) -> RuleApplication | None:
    for R in inst.requests:
        fam = common_factor_family(inst, R)
        if len(fam) >= inst.k + 1:
            return RuleApplication("rule4", Action.DROP, pivot=R.id, request=R.id,
                                   witness=tuple(fam))
    return None


# -- (5) dominating wingspans -------------------------------------------------

def _l2_pivots(inst: TreeInstance) -> Iterator[tuple[int, int]]:
    """L2-leaves with no unit request, with the node they hang from."""
    part = inst.partition
    for x in sorted(part.of(NodeClass.L2)):
        if all(inst.length(r) >= 2 for r in inst.requests_at[x]):
            yield x, inst.adj[x][0]


def dominated_matching(inst: TreeInstance, sub: frozenset[int]) -> list[int]:
    """Max endpoint-disjoint leaf-to-leaf or mixed requests inside ``sub``."""
    g = AuxGraph()
    leaves = inst.leaves
    for r in inst.requests:
        if r.u in sub and r.v in sub and (r.u in leaves or r.v in leaves):
            g.add_edge(r.u, r.v, r.id)
    return sorted(g.edges[frozenset(p)] for p in max_matching(g))


def rule5_dominating_wingspan(inst: TreeInstance) -> RuleApplication | None:
    if not inst.is_caterpillar:
        raise ModeError("Rule 5 is defined on caterpillars only")
    for x, f in _l2_pivots(inst):
        w = caterpillar_wingspan(inst, x)
        if f in w.bounds:
            continue
        found = dominated_matching(inst, w.subcaterpillar)
        if len(found) >= inst.k + 1:
            return RuleApplication("rule5", Action.CONTRACT, pivot=x, edge=norm_edge(x, f),
                                   witness=tuple(found), window=w.subcaterpillar)
    return None


def _rooted_at(inst: TreeInstance, nodes: frozenset[int] | set[int]) -> frozenset[int]:
    """``nodes`` plus the leaves hanging from its internal members."""
    extra = {y for v in nodes if v in inst.internal for y in inst.adj[v] if y in inst.leaves}
    return frozenset(nodes) | extra


def rule5a_bidimensional(inst: TreeInstance) -> RuleApplication | None:
    for x, f in _l2_pivots(inst):
        cat = caterpillar_of_node(inst, x)
        backbone = frozenset(cat.backbone)
        for w in general_wingspans(inst, x):
            sub = _rooted_at(inst, w.nodes & backbone)
            found = dominated_matching(inst, sub)
            if len(found) >= inst.k + 1:
                return RuleApplication("rule5a", Action.CONTRACT, pivot=x,
                                       edge=norm_edge(x, f), witness=tuple(found), window=sub)
    return None


@dataclass
class GeneralizedWingspanContext:
    x: int
    caterpillar: Caterpillar
    f: int
    group: frozenset[int]
    side: dict[int, int]           # node -> neighbour of f it hangs below
    a_side: int
    b_side: int
    a: int
    b: int
    closest: list[Request]         # minimal requests of x into A(x)
    covers: bool

    def toward_b(self, inst: TreeInstance) -> frozenset[int]:
        return _rooted_at(inst, set(inst.node_path(self.x, self.b)))

    def toward(self, inst: TreeInstance, z: int) -> frozenset[int]:
        return _rooted_at(inst, set(inst.node_path(self.a, z)))


def covers_caterpillar(inst: TreeInstance, x: int, cat: Caterpillar) -> bool:
    """True if ``x`` (inside ``cat``) has two minimal requests spanning its backbone."""
    backbone = frozenset(cat.backbone)
    mins = minimal_requests(inst, x)
    paths = inst.request_internal
    return any(paths[r1.id] | paths[r2.id] >= backbone for r1, r2 in combinations(mins, 2))


def generalized_contexts(inst: TreeInstance, x: int) -> list[GeneralizedWingspanContext]:
    """Both orientations (A, B) of the two sides of f(x)."""
    f = inst.adj[x][0]
    cat = caterpillar_of_node(inst, x)
    side = branch_sides(inst, f)
    n1, n2 = sorted(w for w in inst.adj[f] if w in inst.internal)
    covers = covers_caterpillar(inst, x, cat)
    mins = minimal_requests(inst, x)
    group = frozenset(w for w in inst.adj[f] if w in inst.leaves)
    out = []
    for a_side, b_side in ((n1, n2), (n2, n1)):
        ext = {side.get(e): e for e in (cat.extremities or ())}
        a = ext.get(a_side, f)
        b = ext.get(b_side, f)
        closest = [r for r in mins if side.get(r.other(x)) == a_side]
        out.append(GeneralizedWingspanContext(x, cat, f, group, side, a_side, b_side, a, b,
                                              closest, covers))
    return out


def area_matching(inst: TreeInstance, area_b: frozenset[int], area_a: frozenset[int]) -> list[int]:
    """Max endpoint-disjoint requests with one end in each area."""
    g = AuxGraph()
    for r in inst.requests:
        if (r.u in area_b and r.v in area_a) or (r.u in area_a and r.v in area_b):
            g.add_edge(r.u, r.v, r.id)
    return sorted(g.edges[frozenset(p)] for p in max_matching(g))


def rule5b_generalized(inst: TreeInstance) -> RuleApplication | None:
    for x, f in _l2_pivots(inst):
        for ctx in generalized_contexts(inst, x):
            if not ctx.covers:
                break
            area_b = ctx.toward_b(inst)
            certs = []
            for r in ctx.closest:
                z = r.other(x)
                found = area_matching(inst, area_b, ctx.toward(inst, z))
                if len(found) < inst.k + 1:
                    break
                certs.append((z, tuple(found)))
            else:
                return RuleApplication("rule5b", Action.CONTRACT, pivot=x, edge=norm_edge(x, f),
                                       witness=tuple(certs), window=area_b)
    return None


# -- cascade ------------------------------------------------------------------

DETECTORS: dict[str, Callable[[TreeInstance], RuleApplication | None]] = {
    "rule0": rule0_unit_request,
    "rule1": rule1_disjoint_requests,
    "rule2": rule2_unique_direction,
    "rule3": rule3_inclusion,
    "rule4": rule4_common_factor,
    "rule5": rule5_dominating_wingspan,
    "rule5a": rule5a_bidimensional,
    "rule5b": rule5b_generalized,
}

ORDER = {
    "caterpillar": ("rule0", "rule1", "rule2", "rule3", "rule4", "rule5"),
    "general": ("rule0", "rule1", "rule2", "rule3", "rule4", "rule5a", "rule5b"),
}

ALL_RULES = tuple(DETECTORS)


def check_mode(inst: TreeInstance, mode: str) -> None:
    if mode not in ORDER:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "caterpillar" and not inst.is_caterpillar:
        raise ModeError("instance is not a caterpillar")


def first_applicable(inst: TreeInstance, mode: str = "general") -> RuleApplication | None:
    check_mode(inst, mode)
    if inst.verdict != Verdict.OPEN:
        return None
    for name in ORDER[mode]:
        app = DETECTORS[name](inst)
        if app is not None:
            return app
    return None


def apply_rule(inst: TreeInstance, app: RuleApplication) -> TreeInstance:
    if app.action == Action.DELETE_EDGE:
        out = delete_edge(inst, app.edge)
        return TreeInstance(out.nodes, out.edges, out.requests, out.k - 1, out.verdict)
    if app.action == Action.CONTRACT:
        return contract_edge(inst, app.edge)
    if app.action == Action.DROP:
        return drop_request(inst, app.request)
    if app.action == Action.FALSE:
        return false_instance()
    raise ValueError(f"unknown action {app.action}")


# -- witness re-validation ----------------------------------------------------

def _endpoint_disjoint(inst: TreeInstance, ids: tuple[int, ...]) -> bool:
    seen: set[int] = set()
    for rid in ids:
        r = inst.request_by_id[rid]
        if r.u in seen or r.v in seen:
            return False
        seen.update(r.pair)
    return True


def validate_witness(inst: TreeInstance, app: RuleApplication) -> bool:
    """Re-check an application's precondition from its witness alone."""
    k = inst.k
    byid = inst.request_by_id
    paths = inst.request_edges
    if app.rule == "rule0":
        r = byid.get(app.pivot)
        return r is not None and paths[r.id] == {app.edge}
    if app.rule == "rule1":
        rs = [byid[i] for i in app.witness]
        return len(rs) >= k + 1 and is_packing(inst, rs)
    if app.rule == "rule2":
        x = app.pivot
        if x in inst.leaves:
            ds = set(directions_from(inst, x).values())
            return app.edge == norm_edge(x, inst.adj[x][0]) and len(ds) <= 1
        ds = set(directions_from(inst, x).values())
        return (inst.degree(x) == 2 and x in inst.partition.inner and len(ds) <= 1
                and app.edge not in ds and x in app.edge)
    if app.rule == "rule3":
        (small,) = app.witness
        return small != app.request and paths[small] < paths[app.request]
    if app.rule == "rule4":
        r_edges = paths[app.request]
        fam = [i for i in app.witness if i != app.request]
        if len(set(fam)) < k + 1:
            return False
        if any(not (paths[i] & r_edges) for i in fam):
            return False
        return all(paths[i] & paths[j] <= r_edges for i, j in combinations(fam, 2))
    if app.rule in ("rule5", "rule5a"):
        x = app.pivot
        if inst.partition.cls.get(x) != NodeClass.L2:
            return False
        ids = app.witness
        if len(ids) < k + 1 or not _endpoint_disjoint(inst, ids):
            return False
        for rid in ids:
            r = byid[rid]
            if not (r.u in app.window and r.v in app.window):
                return False
            if r.u in inst.internal and r.v in inst.internal:
                return False
        return True
    if app.rule == "rule5b":
        x = app.pivot
        if inst.partition.cls.get(x) != NodeClass.L2:
            return False
        ctxs = [c for c in generalized_contexts(inst, x) if c.covers]
        for ctx in ctxs:
            zs = sorted(r.other(x) for r in ctx.closest)
            if sorted(z for z, _ in app.witness) != zs:
                continue
            ok = True
            for z, ids in app.witness:
                area_a = ctx.toward(inst, z)
                if len(ids) < k + 1 or not _endpoint_disjoint(inst, ids):
                    ok = False
                    break
                for rid in ids:
                    r = byid[rid]
                    if not ((r.u in app.window and r.v in area_a)
                            or (r.v in app.window and r.u in area_a)):
                        ok = False
                if not ok:
                    break
            if ok:
                return True
        return False
    raise ValueError(f"unknown rule {app.rule}")


def is_reduced(inst: TreeInstance, mode: str = "general") -> bool:
    return first_applicable(inst, mode) is None


def rule_metadata() -> dict[str, Any]:
    return {"order": ORDER}
