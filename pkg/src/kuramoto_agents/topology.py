"""Network topologies: all-to-all and the deterministic hierarchical scale-free graph.

Adjacency matrices are symmetric, binary and have a zero diagonal. Graphs are
stored densely (the largest graph used here has 81 nodes); a sorted CSR view is
cached for the integrator.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass
from functools import cached_property
from typing import IO, Iterable

import numpy as np
import scipy.sparse as sp

from .errors import EdgeListParseError


@dataclass(frozen=True, eq=False)
class Adjacency:
    """Dense N x N connection matrix plus optional per-node hierarchy levels.

    The constructor does not enforce symmetry, zero diagonal or binary
    entries; use :func:`validate` to list violations.
    """

    matrix: np.ndarray
    levels: np.ndarray | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=True)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {m.shape}")
        if m.shape[0] < 1:
            raise ValueError("adjacency needs at least one node")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.levels is not None:
            lv = np.array(self.levels, dtype=np.int64, copy=True)
            if lv.shape != (m.shape[0],):
                raise ValueError("levels must have one entry per node")
            lv.setflags(write=False)
            object.__setattr__(self, "levels", lv)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        return np.count_nonzero(self.matrix, axis=1)

    @property
    def edge_count(self) -> int:
        """Number of undirected edges (pairs i < j connected in either direction)."""
        return len(self.edges())

    def edges(self) -> list[tuple[int, int]]:
        both = (self.matrix != 0) | (self.matrix.T != 0)
        i, j = np.nonzero(np.triu(both, k=1))
        return list(zip(i.tolist(), j.tolist()))

    @cached_property
    def csr(self) -> sp.csr_matrix:
        # Sorted column indices: scipy's CSR product then accumulates each row
        # in ascending j, the fixed summation order the dynamics rely on.
        out = sp.csr_matrix(self.matrix)
        out.sort_indices()
        return out

    def __eq__(self, other):
        if not isinstance(other, Adjacency):
            return NotImplemented
        if not np.array_equal(self.matrix, other.matrix):
            return False
        if (self.levels is None) != (other.levels is None):
            return False
        return self.levels is None or np.array_equal(self.levels, other.levels)

    __hash__ = None

    def describe(self) -> str:
        d = self.degrees
        return f"n={self.n} edges={self.edge_count} max_degree={int(d.max())}"


def as_adjacency(obj) -> Adjacency:
    return obj if isinstance(obj, Adjacency) else Adjacency(np.asarray(obj))


def all_to_all(n: int) -> Adjacency:
    """Complete graph on ``n`` nodes without self-loops."""
    if n < 1:
        raise ValueError(f"all_to_all needs n >= 1, got {n}")
    return Adjacency(np.ones((n, n)) - np.eye(n))


def deterministic_scale_free(iterations: int) -> Adjacency:
    """Hierarchical deterministic scale-free graph with ``3**iterations`` nodes.

    Each iteration copies the current unit twice and wires the bottom nodes of
    both copies to the root of the original. Bottom nodes of the single-node
    unit are the root itself; afterwards they are the union of the copies'
    bottom nodes (``2**k`` of them). Nodes are ordered original unit first,
    then copy 1, then copy 2, so the root is node 0. ``levels[i]`` is the
    iteration that created node ``i``.
    """
    if iterations < 0:
        raise ValueError(f"iterations must be >= 0, got {iterations}")
    edges = np.empty((0, 2), dtype=np.int64)
    bottom = np.array([0], dtype=np.int64)
    levels = np.array([0], dtype=np.int64)
    size = 1
    for k in range(1, iterations + 1):
        copies = [edges + c * size for c in (1, 2)]
        new_bottom = np.concatenate([bottom + size, bottom + 2 * size])
        spokes = np.column_stack([np.zeros_like(new_bottom), new_bottom])
        edges = np.concatenate([edges, *copies, spokes])
        bottom = new_bottom
        levels = np.concatenate([levels, np.full(2 * size, k, dtype=np.int64)])
        size *= 3

    m = np.zeros((size, size))
    m[edges[:, 0], edges[:, 1]] = 1.0
    m[edges[:, 1], edges[:, 0]] = 1.0
    return Adjacency(m, levels=levels)


def validate(adjacency) -> list[str]:
    """List violated invariants (symmetric, zero diagonal, binary); empty if valid."""
    m = adjacency.matrix if isinstance(adjacency, Adjacency) else np.asarray(adjacency, dtype=float)
    problems: list[str] = []
    for i in np.flatnonzero(np.diag(m)):
        problems.append(f"nonzero diagonal at {i}")
    bad = ~np.isin(m, (0.0, 1.0))
    for i, j in zip(*np.nonzero(bad)):
        problems.append(f"non-binary entry at ({i},{j})")
    i_idx, j_idx = np.nonzero(np.triu(m != m.T, k=1))
    for i, j in zip(i_idx, j_idx):
        problems.append(f"asymmetric at ({i},{j})")
    return problems


# -- edge-list text format ---------------------------------------------------


def dumps_adjacency(adjacency: Adjacency) -> str:
    lines = [f"n={adjacency.n}"]
    lines += [f"{i} {j}" for i, j in adjacency.edges()]
    return "\n".join(lines) + "\n"


def save_adjacency(adjacency: Adjacency, sink) -> None:
    """Write the edge list to a path or a text/binary file object."""
    text = dumps_adjacency(adjacency)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    elif isinstance(sink, io.TextIOBase):
        sink.write(text)
    else:
        sink.write(text.encode("utf-8"))


def _iter_lines(source) -> Iterable[str]:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def loads_adjacency(text: str) -> Adjacency:
    return load_adjacency(io.StringIO(text))


def load_adjacency(source: str | os.PathLike | IO) -> Adjacency:
    """Parse the edge-list format.

    Optional ``n=<count>`` header, then one undirected ``i j`` pair per line
    (0-based). ``#`` starts a comment line. The node count is the header
    value, or ``1 + max id`` without a header.
    """
    declared: int | None = None
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().startswith("n="):
            if declared is not None or pairs:
                raise EdgeListParseError("'n=' header must come first and only once", lineno)
            try:
                declared = int(line[2:].strip())
            except ValueError:
                raise EdgeListParseError(f"bad node count {line[2:].strip()!r}", lineno) from None
            if declared < 1:
                raise EdgeListParseError("node count must be >= 1", lineno)
            continue
        if "->" in line or line.split()[0].lower() in ("directed", "asymmetric", "arc"):
            raise EdgeListParseError("asymmetric/directed edges are not supported", lineno)
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(f"expected 'i j', got {line!r}", lineno)
        try:
            i, j = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(f"non-numeric token in {line!r}", lineno) from None
        if i < 0 or j < 0:
            raise EdgeListParseError("node ids must be non-negative", lineno)
        if i == j:
            raise EdgeListParseError(f"self-loop at node {i}", lineno)
        if declared is not None and max(i, j) >= declared:
            raise EdgeListParseError(f"node id {max(i, j)} exceeds declared n={declared}", lineno)
        pairs.append((i, j))

    if declared is None:
        if not pairs:
            raise EdgeListParseError("empty edge list without 'n=' header", 1)
        declared = 1 + max(max(p) for p in pairs)
    m = np.zeros((declared, declared))
    for i, j in pairs:
        m[i, j] = m[j, i] = 1.0
    return Adjacency(m)
