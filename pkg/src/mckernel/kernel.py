"""Fixed-point driver, replayable traces and structural bound checks."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .rules import (
    Action,
    ModeError,
    RuleApplication,
    apply_rule,
    check_mode,
    false_instance,
    first_applicable,
    true_instance,
)
from .tree import (
    Edge,
    NodeClass,
    TreeInstance,
    Verdict,
    caterpillar_wingspan,
    contraction_survivor,
    directions_from,
    inst_caterpillars,
    norm_edge,
)

__all__ = [
    "KernelTrace", "KernelResult", "StructuralReport", "ClaimCheck", "ModeError",
    "kernelize", "kernelize_full", "replay", "digest", "finalize",
    "structural_report", "verify_kernel_bounds", "format_trace", "parse_trace",
]


def digest(inst: TreeInstance) -> str:
    """Stable fingerprint of every field of an instance."""
    payload = {
        "nodes": sorted(inst.nodes),
        "edges": sorted(inst.edges),
        "requests": [[r.id, r.u, r.v] for r in inst.requests],
        "k": inst.k,
        "verdict": inst.verdict.value,
    }
    return hashlib.sha256(json.dumps(payload, separators=(",", ":")).encode()).hexdigest()


def finalize(inst: TreeInstance) -> TreeInstance:
    """Replace decided instances by the canonical TRUE/FALSE instance."""
    if inst.k < 0:
        return false_instance()
    if inst.verdict == Verdict.TRUE or not inst.requests:
        return true_instance()
    if inst.verdict == Verdict.FALSE or inst.k <= 0:
        return false_instance()
    return inst


@dataclass
class KernelTrace:
    """Applications in order, grouped into potential-decreasing steps.

    Applications before the first decreasing one form step 0 (the potential
    did not move); each later step is one decreasing application followed by
    any applications that left the potential unchanged.
    """

    applications: list[RuleApplication] = field(default_factory=list)
    step_of: list[int] = field(default_factory=list)   # step index per application, 0 = preamble
    potentials: list[int] = field(default_factory=list)  # potentials[i] after step i; [0] initial
    initial_digest: str = ""
    final_digest: str = ""

    @property
    def iterations(self) -> int:
        return len(self.potentials) - 1

    @property
    def rules(self) -> list[str]:
        return [a.rule for a in self.applications]


@dataclass
class KernelResult:
    kernel: TreeInstance
    trace: KernelTrace
    deleted: list[Edge]             # original edges removed by unit-request deletions
    origin: dict[Edge, Edge]        # kernel edge -> original edge


def _track(inst: TreeInstance, app: RuleApplication, origin: dict[Edge, Edge],
           deleted: list[Edge]) -> dict[Edge, Edge]:
    if app.action not in (Action.CONTRACT, Action.DELETE_EDGE):
        return origin
    e = norm_edge(*app.edge)
    if app.action == Action.DELETE_EDGE:
        deleted.append(origin[e])
    s, t = contraction_survivor(inst, e)
    out = {}
    for (a, b), o in origin.items():
        if (a, b) == e:
            continue
        out[norm_edge(s if a == t else a, s if b == t else b)] = o
    return out


def kernelize_full(inst: TreeInstance, mode: str = "general") -> KernelResult:
    check_mode(inst, mode)
    trace = KernelTrace(initial_digest=digest(inst))
    origin = {e: e for e in inst.edges}
    deleted: list[Edge] = []
    cur = finalize(inst)
    if cur is not inst:
        origin = {e: e for e in cur.edges}
    trace.potentials.append(cur.potential)
    step = 0
    while cur.verdict == Verdict.OPEN:
        app = first_applicable(cur, mode)
        if app is None:
            break
        origin = _track(cur, app, origin, deleted)
        nxt = finalize(apply_rule(cur, app))
        if nxt.verdict != Verdict.OPEN:
            origin = {}
        if nxt.potential < trace.potentials[-1] or nxt.verdict != Verdict.OPEN:
            step += 1
            trace.potentials.append(nxt.potential)
        else:
            trace.potentials[-1] = nxt.potential
        trace.applications.append(app)
        trace.step_of.append(step)
        cur = nxt
    trace.final_digest = digest(cur)
    return KernelResult(cur, trace, deleted, origin)


def kernelize(inst: TreeInstance, mode: str = "general") -> tuple[TreeInstance, KernelTrace]:
    res = kernelize_full(inst, mode)
    return res.kernel, res.trace


def replay(inst: TreeInstance, apps: list[RuleApplication]) -> TreeInstance:
    cur = finalize(inst)
    for app in apps:
        cur = finalize(apply_rule(cur, app))
    return cur


# -- trace text format ------------------------------------------------------

def _ints(xs) -> str:
    return ",".join(str(x) for x in xs)


def format_trace(trace: KernelTrace) -> str:
    lines = [f"# initial {trace.initial_digest}", f"# final {trace.final_digest}"]
    for step, app in zip(trace.step_of, trace.applications):
        parts = [str(step), app.rule, app.action.value]
        if app.pivot is not None:
            parts.append(f"pivot={app.pivot}")
        if app.edge is not None:
            parts.append(f"edge={_ints(app.edge)}")
        if app.request is not None:
            parts.append(f"request={app.request}")
        if app.witness:
            parts.append("witness=" + json.dumps(app.witness, separators=(",", ":")))
        if app.window:
            parts.append(f"window={_ints(sorted(app.window))}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def _tuplify(x):
    return tuple(_tuplify(y) for y in x) if isinstance(x, list) else x


def parse_trace(text: str) -> tuple[list[int], list[RuleApplication]]:
    steps, apps = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        step, rule, action, *rest = line.split()
        kw: dict = {}
        for item in rest:
            key, _, val = item.partition("=")
            if key == "edge":
                a, b = val.split(",")
                kw["edge"] = (int(a), int(b))
            elif key in ("pivot", "request"):
                kw[key] = int(val)
            elif key == "witness":
                kw["witness"] = _tuplify(json.loads(val))
            elif key == "window":
                kw["window"] = frozenset(int(v) for v in val.split(","))
            else:
                raise ValueError(f"unknown trace field {key!r}")
        steps.append(int(step))
        apps.append(RuleApplication(rule, Action(action), **kw))
    return steps, apps


# -- structural report ------------------------------------------------------

@dataclass
class StructuralReport:
    k: int
    mode: str
    verdict: Verdict
    reduced: bool
    nodes: int
    counts: dict[str, int]
    bad_leaves: int
    caterpillars: int
    max_wingspan: int
    max_r_neighbors: int           # per node, per direction
    max_group_to_node: int
    max_group_to_group: int

    def as_dict(self) -> dict:
        out = dict(self.__dict__)
        out["verdict"] = self.verdict.value
        return out


def _max_r_neighbors(inst: TreeInstance) -> int:
    best = 0
    for x in inst.nodes:
        if not inst.requests_at[x]:
            continue
        per: dict[Edge, set[int]] = {}
        for rid, e in directions_from(inst, x).items():
            per.setdefault(e, set()).add(inst.request_by_id[rid].other(x))
        best = max([best] + [len(s) for s in per.values()])
    return best


def _group_counts(inst: TreeInstance) -> tuple[int, int]:
    groups: dict[int, set[int]] = {}
    for x in inst.leaves:
        groups.setdefault(inst.adj[x][0], set()).add(x)
    to_node: dict[tuple[int, int], int] = {}
    to_group: dict[tuple[int, int], int] = {}
    for r in inst.requests:
        for x, y in ((r.u, r.v), (r.v, r.u)):
            if x in inst.leaves:
                g = inst.adj[x][0]
                to_node[(g, y)] = to_node.get((g, y), 0) + 1
        if r.u in inst.leaves and r.v in inst.leaves:
            gu, gv = inst.adj[r.u][0], inst.adj[r.v][0]
            if gu != gv:
                key = (min(gu, gv), max(gu, gv))
                to_group[key] = to_group.get(key, 0) + 1
    return max(to_node.values(), default=0), max(to_group.values(), default=0)


def structural_report(inst: TreeInstance, mode: str = "general") -> StructuralReport:
    from .rules import is_reduced

    check_mode(inst, mode)
    part = inst.partition
    counts = {c.value: n for c, n in part.counts().items()}
    wing = 0
    if mode == "caterpillar" and inst.verdict == Verdict.OPEN:
        for x in sorted(part.of(NodeClass.L2)):
            wing = max(wing, caterpillar_wingspan(inst, x).size)
    g_node, g_group = _group_counts(inst)
    reduced = inst.verdict != Verdict.OPEN or is_reduced(inst, mode)
    return StructuralReport(
        k=inst.k, mode=mode, verdict=inst.verdict, reduced=reduced, nodes=len(inst.nodes),
        counts=counts, bad_leaves=len(part.bad),
        caterpillars=len(inst_caterpillars(inst)) if inst.internal else 0,
        max_wingspan=wing, max_r_neighbors=_max_r_neighbors(inst),
        max_group_to_node=g_node, max_group_to_group=g_group,
    )


@dataclass(frozen=True)
class ClaimCheck:
    claim: str
    bound: int
    observed: int

    @property
    def ok(self) -> bool:
        return self.observed <= self.bound


class NotReducedError(ValueError):
    """Bounds were requested for an instance some rule still applies to."""


def verify_kernel_bounds(report: StructuralReport, k: int | None = None,
                         mode: str | None = None) -> list[ClaimCheck]:
    if not report.reduced:
        raise NotReducedError("instance is not reduced")
    k = report.k if k is None else k
    mode = report.mode if mode is None else mode
    if report.verdict != Verdict.OPEN:
        return []
    checks = [
        ClaimCheck("bad_leaves", 2 * (k + 1) * (2 * k + 1) - 1, report.bad_leaves),
        ClaimCheck("I1", k, report.counts["I1"]),
        ClaimCheck("I3", k, report.counts["I3"]),
        ClaimCheck("caterpillars", 2 * k - 1, report.caterpillars),
        ClaimCheck("r_neighbors_per_direction", k + 1, report.max_r_neighbors),
        ClaimCheck("group_to_node", k + 1, report.max_group_to_node),
        ClaimCheck("group_to_group", (2 * k + 1) * (k + 2) - 1, report.max_group_to_group),
    ]
    if mode == "caterpillar":
        checks.insert(1, ClaimCheck("wingspan", 2 * (k + 1) * (4 * k + 3) - 1,
                                    report.max_wingspan))
    return checks

