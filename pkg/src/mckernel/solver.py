"""Exact multicut solvers: bounded branching and an exhaustive oracle.

Both work on raw request paths and share no code with the reduction rules,
so they can referee them.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .tree import Edge, InstanceError, TreeInstance, Verdict, norm_edge

ORACLE_MAX_EDGES = 30


@dataclass(frozen=True)
class Multicut:
    edges: frozenset[Edge]

    @property
    def size(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)


def is_multicut(inst: TreeInstance, s) -> bool:
    cut = {norm_edge(*e) for e in s}
    for e in cut:
        if e not in inst.edges:
            raise InstanceError(f"edge {e} not in tree")
    return all(inst.request_edges[r.id] & cut for r in inst.requests)


def _disjoint_lower_bound(paths: list[frozenset[Edge]]) -> int:
    used: set[Edge] = set()
    n = 0
    for p in sorted(paths, key=len):
        if not (p & used):
            used |= p
            n += 1
    return n


def _branch(paths: list[frozenset[Edge]], k: int) -> list[Edge] | None:
    if not paths:
        return []
    if k == 0 or _disjoint_lower_bound(paths) > k:
        return None
    pick = min(paths, key=lambda p: (len(p), sorted(p)))
    for e in sorted(pick):
        rest = [p for p in paths if e not in p]
        sub = _branch(rest, k - 1)
        if sub is not None:
            return [e] + sub
    return None


def solve_decision(inst: TreeInstance, k: int | None = None) -> Multicut | None:
    """A multicut of size at most ``k`` (default: the instance budget), or ``None``."""
    k = inst.k if k is None else k
    if k < 0:
        return None
    paths = [inst.request_edges[r.id] for r in inst.requests]
    found = _branch(paths, k)
    return None if found is None else Multicut(frozenset(found))


class OracleTooLarge(ValueError):
    """The exhaustive oracle refuses trees with too many edges."""


def brute_force_opt(inst: TreeInstance, at_most: int | None = None) -> int:
    """Minimum multicut size by exhaustive search over edge subsets.

    Edges whose request set is contained in another edge's are skipped (some
    optimum avoids them). With ``at_most`` the search stops early and returns
    ``at_most + 1`` when the optimum exceeds it.
    """
    if len(inst.edges) > ORACLE_MAX_EDGES:
        raise OracleTooLarge(f"oracle limited to {ORACLE_MAX_EDGES} edges")
    if not inst.requests:
        return 0
    masks: dict[Edge, int] = dict.fromkeys(inst.edges, 0)
    for i, r in enumerate(inst.requests):
        for e in inst.request_edges[r.id]:
            masks[e] |= 1 << i
    distinct = sorted({m for m in masks.values() if m})
    useful = [m for m in distinct if not any(m != o and m & o == m for o in distinct)]
    full = (1 << len(inst.requests)) - 1
    limit = len(inst.requests) if at_most is None else min(at_most, len(inst.requests))
    for size in range(1, limit + 1):
        for combo in combinations(useful, size):
            acc = 0
            for m in combo:
                acc |= m
            if acc == full:
                return size
    return limit + 1


def solve(inst: TreeInstance, k: int | None = None, use_kernel: bool = True,
          mode: str = "general") -> Multicut | None:
    """Decide the instance, optionally kernelizing first.

    A kernel solution is mapped back through the contractions and extended by
    the edges removed for unit requests.
    """
    from .kernel import kernelize_full

    if k is not None and k != inst.k:
        verdict = (Verdict.TRUE if not inst.requests else
                   Verdict.FALSE if k <= 0 else Verdict.OPEN)
        inst = TreeInstance(inst.nodes, inst.edges, inst.requests, k, verdict)
    if not use_kernel or inst.verdict != Verdict.OPEN:
        return solve_decision(inst)
    res = kernelize_full(inst, mode)
    if res.kernel.verdict == Verdict.FALSE:
        return None
    if res.kernel.verdict == Verdict.TRUE:
        core: list[Edge] = []
    else:
        sub = solve_decision(res.kernel)
        if sub is None:
            return None
        core = [res.origin[e] for e in sub.edges]
    lifted = frozenset(core) | frozenset(res.deleted)
    if len(lifted) > inst.k or not is_multicut(inst, lifted):
        raise RuntimeError("kernel solution does not lift to the input instance")
    return Multicut(lifted)
