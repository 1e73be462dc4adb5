"""Text instance files.

Layout::

    c free comment
    p multicut <n> <m> <k>
    e <u> <v>        (n - 1 lines)
    r <x> <y>        (m lines)

Ids are 1-indexed in files and 0-indexed in memory.
"""

from __future__ import annotations

from .tree import InstanceError, TreeInstance, build_instance


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        super().__init__(msg if line is None else f"line {line}: {msg}")
        self.line = line


def _ints(fields: list[str], count: int, lineno: int) -> list[int]:
    if len(fields) != count:
        raise ParseError(f"expected {count} integers, got {len(fields)}", lineno)
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise ParseError(f"non-integer field in {fields}", lineno) from None


def parse_instance(text: str) -> TreeInstance:
    header: tuple[int, int, int] | None = None
    edges: list[tuple[int, int]] = []
    reqs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tag, *fields = line.split()
        if tag == "p":
            if header is not None:
                raise ParseError("second header", lineno)
            if not fields or fields[0] != "multicut":
                raise ParseError("header must read 'p multicut n m k'", lineno)
            n, m, k = _ints(fields[1:], 3, lineno)
            if n < 1 or m < 0:
                raise ParseError("header counts out of range", lineno)
            header = (n, m, k)
            continue
        if header is None:
            raise ParseError("body line before header", lineno)
        if tag not in ("e", "r"):
            raise ParseError(f"unknown line type {tag!r}", lineno)
        a, b = _ints(fields, 2, lineno)
        n = header[0]
        if not (1 <= a <= n and 1 <= b <= n):
            raise ParseError(f"id outside [1, {n}]", lineno)
        (edges if tag == "e" else reqs).append((a - 1, b - 1))
    if header is None:
        raise ParseError("missing header")
    n, m, k = header
    if len(edges) != n - 1:
        raise ParseError(f"header promises {n - 1} edges, body has {len(edges)}")
    if len(reqs) != m:
        raise ParseError(f"header promises {m} requests, body has {len(reqs)}")
    try:
        return build_instance(edges, reqs, k, nodes=range(n))
    except InstanceError as exc:
        raise ParseError(str(exc)) from None


def format_instance(inst: TreeInstance, comments: tuple[str, ...] = ()) -> str:
    """Canonical text: nodes renumbered in id order, edges and requests sorted."""
    index = {v: i + 1 for i, v in enumerate(sorted(inst.nodes))}
    edges = sorted(tuple(sorted((index[a], index[b]))) for a, b in inst.edges)
    reqs = sorted(tuple(sorted((index[r.u], index[r.v]))) for r in inst.requests)
    lines = [f"c {c}" for c in comments]
    lines.append(f"p multicut {len(index)} {len(reqs)} {inst.k}")
    lines += [f"e {a} {b}" for a, b in edges]
    lines += [f"r {a} {b}" for a, b in reqs]
    return "\n".join(lines) + "\n"


def read_instance(path: str) -> TreeInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def write_instance(path: str, inst: TreeInstance, comments: tuple[str, ...] = ()) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(inst, comments))
