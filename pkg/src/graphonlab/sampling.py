"""Graph sampling from step graphons, couplings, degree repair, and ingestion.

Sampling is dense and exact: one uniform draw per unordered vertex pair
(desk scale, n up to a few thousand). Everything is deterministic given the
64-bit seed; per-stage streams are derived with ``seeding.derive_seed`` so
trials parallelize without sharing state.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGraph,
    EmptyInput,
    InvalidModel,
    ParseError,
)
from .graphon import StepGraphon, block_index
from .seeding import derive_seed, make_rng

# sub-stream indices for derived seeds
_STREAM_POSITIONS = 1
_STREAM_EDGES_0 = 2
_STREAM_EDGES_1 = 3


@dataclass(frozen=True)
class SampledGraph:
    """Simple undirected graph, optionally with its latent vertex positions.

    ``adjacency`` is a dense symmetric 0/1 uint8 matrix with zero diagonal.
    ``latent_positions`` is None for externally loaded graphs.
    """

    adjacency: np.ndarray
    latent_positions: np.ndarray | None = None
    seed: int | None = None
    source: str = "sampled"

    def __post_init__(self):
        a = np.asarray(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidModel("adjacency must be square")
        if a.dtype != np.uint8:
            a = a.astype(np.uint8)
        if ((a != 0) & (a != 1)).any():
            raise InvalidModel("adjacency entries must be 0/1")
        if (a != a.T).any():
            raise InvalidModel("adjacency must be symmetric")
        if np.diagonal(a).any():
            raise InvalidModel("adjacency must have zero diagonal")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)
        if self.latent_positions is not None:
            x = np.asarray(self.latent_positions, dtype=float).copy()
            if x.shape != (a.shape[0],):
                raise InvalidModel("latent_positions length must equal n")
            x.setflags(write=False)
            object.__setattr__(self, "latent_positions", x)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(np.int64)

    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    def with_adjacency(self, adjacency, source=None) -> "SampledGraph":
        return SampledGraph(
            adjacency,
            latent_positions=self.latent_positions,
            seed=self.seed,
            source=source if source is not None else self.source,
        )


@dataclass(frozen=True)
class CoupledPair:
    """Two sampled graphs sharing one latent-position draw.

    Edge indicators are conditionally independent across the two graphs given
    the positions unless the pair was built with a shared edge-randomness
    stream (see ``sample_coupled``).
    """

    g0: SampledGraph
    g1: SampledGraph
    shared_edge_randomness: bool = False

    def __post_init__(self):
        if self.g0.latent_positions is None or self.g1.latent_positions is None:
            raise InvalidModel("coupled graphs must carry latent positions")
        if not np.array_equal(self.g0.latent_positions, self.g1.latent_positions):
            raise InvalidModel("coupled graphs must share latent positions")


@dataclass(frozen=True)
class RepairReport:
    """Bookkeeping for the degree-repair pass."""

    C: float
    n_small: int
    n_large: int
    n_just_right: int
    edges_added: int
    edges_removed: int
    max_per_vertex_modification: int

    def __post_init__(self):
        if self.n_small < 0 or self.n_large < 0 or self.n_just_right < 0:
            raise InvalidModel("vertex class counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.n_small + self.n_large + self.n_just_right


def _positions_and_blocks(w: StepGraphon, n: int, seed: int):
    rng = make_rng(derive_seed(seed, _STREAM_POSITIONS))
    x = rng.random(n)
    return x, block_index(w.block_weights, x)


def _fill_edges(adj, blocks, densities, rng):
    n = adj.shape[0]
    for i in range(n - 1):
        u = rng.random(n - 1 - i)
        p = densities[blocks[i], blocks[i + 1 :]]
        adj[i, i + 1 :] = u < p
    adj |= adj.T


def sample_graph(w: StepGraphon, n: int, seed: int) -> SampledGraph:
    """Draw a graph on n vertices from the step graphon.

    Positions are i.i.d. uniform on [0,1]; each unordered pair {i,j} is an
    edge independently with probability equal to the kernel value at the
    pair's positions. Deterministic given (w, n, seed).
    """
    if n < 2:
        raise InvalidModel(f"need n >= 2, got {n}")
    x, blocks = _positions_and_blocks(w, n, seed)
    adj = np.zeros((n, n), dtype=np.uint8)
    rng = make_rng(derive_seed(seed, _STREAM_EDGES_0))
    _fill_edges(adj, blocks, w.densities, rng)
    return SampledGraph(adj, latent_positions=x, seed=seed)


def sample_coupled(
    w0: StepGraphon,
    w1: StepGraphon,
    n: int,
    seed: int,
    share_edge_randomness: bool = False,
) -> CoupledPair:
    """Sample one graph from each graphon with a shared latent-position draw.

    By default the edge indicators of the two graphs are conditionally
    independent given the positions. With ``share_edge_randomness`` the same
    per-pair uniform drives both graphs (the maximal per-edge coupling),
    which minimizes degree discrepancies between the two samples.
    """
    if n < 2:
        raise InvalidModel(f"need n >= 2, got {n}")
    x, blocks0 = _positions_and_blocks(w0, n, seed)
    blocks1 = block_index(w1.block_weights, x)  # partitions may differ
    a0 = np.zeros((n, n), dtype=np.uint8)
    a1 = np.zeros((n, n), dtype=np.uint8)
    rng0 = make_rng(derive_seed(seed, _STREAM_EDGES_0))
    if share_edge_randomness:
        for i in range(n - 1):
            u = rng0.random(n - 1 - i)
            a0[i, i + 1 :] = u < w0.densities[blocks0[i], blocks0[i + 1 :]]
            a1[i, i + 1 :] = u < w1.densities[blocks1[i], blocks1[i + 1 :]]
        a0 |= a0.T
        a1 |= a1.T
    else:
        _fill_edges(a0, blocks0, w0.densities, rng0)
        rng1 = make_rng(derive_seed(seed, _STREAM_EDGES_1))
        _fill_edges(a1, blocks1, w1.densities, rng1)
    g0 = SampledGraph(a0, latent_positions=x, seed=seed)
    g1 = SampledGraph(a1, latent_positions=x, seed=seed)
    return CoupledPair(g0, g1, shared_edge_randomness=share_edge_randomness)


def repair_coupling(
    g0_raw: SampledGraph, g1: SampledGraph, C: float | None = None
) -> tuple[SampledGraph, RepairReport]:
    """Nudge g0's degrees toward g1's by adding/removing edges.

    A vertex is C-small when its current degree is below deg_g1(v) - C and
    C-large when above deg_g1(v) + C. First pass: add every missing edge
    whose two endpoints are both currently C-small. Second pass: remove every
    existing edge whose endpoints are both currently C-large. Both passes
    sweep vertex pairs in increasing lexicographic index order; since degrees
    only move toward their targets, each set shrinks monotonically and one
    sweep leaves the C-small survivors a clique and the C-large survivors
    mutually non-adjacent.

    C defaults to 2*sqrt(n), the scale of typical degree fluctuations.
    """
    if g0_raw.n != g1.n:
        raise DimensionMismatch(
            f"graphs must have equal order, got {g0_raw.n} and {g1.n}"
        )
    n = g0_raw.n
    if C is None:
        C = 2.0 * np.sqrt(n)
    if C < 0:
        raise InvalidModel("C must be nonnegative")

    adj = np.array(g0_raw.adjacency, dtype=np.uint8)
    deg = adj.sum(axis=1).astype(np.int64)
    target = g1.degrees()
    added = np.zeros(n, dtype=np.int64)
    removed = np.zeros(n, dtype=np.int64)

    def small(v):
        return deg[v] < target[v] - C

    def large(v):
        return deg[v] > target[v] + C

    edges_added = 0
    for v in range(n - 1):
        if not small(v):
            continue
        for u in range(v + 1, n):
            if adj[v, u] or not small(u):
                continue
            adj[v, u] = adj[u, v] = 1
            deg[v] += 1
            deg[u] += 1
            added[v] += 1
            added[u] += 1
            edges_added += 1
            if not small(v):
                break

    edges_removed = 0
    for v in range(n - 1):
        if not large(v):
            continue
        for u in range(v + 1, n):
            if not adj[v, u] or not large(u):
                continue
            adj[v, u] = adj[u, v] = 0
            deg[v] -= 1
            deg[u] -= 1
            removed[v] += 1
            removed[u] += 1
            edges_removed += 1
            if not large(v):
                break

    n_small = int(sum(small(v) for v in range(n)))
    n_large = int(sum(large(v) for v in range(n)))
    report = RepairReport(
        C=float(C),
        n_small=n_small,
        n_large=n_large,
        n_just_right=n - n_small - n_large,
        edges_added=edges_added,
        edges_removed=edges_removed,
        max_per_vertex_modification=int((added + removed).max()) if n else 0,
    )
    repaired = g0_raw.with_adjacency(adj, source="repaired")
    return repaired, report


def empirical_degree_profile(g: SampledGraph) -> np.ndarray:
    """Degrees divided by the degree total, sorted decreasing; sums to 1."""
    deg = g.degrees().astype(float)
    total = deg.sum()
    if total == 0:
        raise EmptyGraph("graph has no edges")
    return np.sort(deg / total)[::-1]


def load_edge_list(stream) -> SampledGraph:
    """Parse whitespace-separated integer pairs into a simple graph.

    Accepts a file-like object or an iterable of lines. '#' starts a comment.
    Vertex ids may be 0- or 1-based; 1-based input (no zero id present) is
    shifted down. Duplicate edges collapse; self-loops are dropped with a
    warning carrying their count.
    """
    if hasattr(stream, "read"):
        lines = stream.read().splitlines()
    elif isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = list(stream)

    edges = []
    self_loops = 0
    for line_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        parts = text.split()
        if len(parts) != 2:
            raise ParseError(line_no, f"expected 'u v', got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(line_no, f"non-integer vertex id in {raw.strip()!r}")
        if u < 0 or v < 0:
            raise ParseError(line_no, "vertex ids must be nonnegative")
        if u == v:
            self_loops += 1
            continue
        edges.append((u, v))

    if not edges:
        raise EmptyInput("no edges found in input")
    if self_loops:
        warnings.warn(f"dropped {self_loops} self-loop(s)", stacklevel=2)

    ids = np.array(edges, dtype=np.int64)
    offset = 1 if ids.min() >= 1 else 0
    ids -= offset
    n = int(ids.max()) + 1
    adj = np.zeros((n, n), dtype=np.uint8)
    adj[ids[:, 0], ids[:, 1]] = 1
    adj[ids[:, 1], ids[:, 0]] = 1
    return SampledGraph(adj, latent_positions=None, seed=None, source="external")


def save_edge_list(g: SampledGraph, path, sidecar: bool = True) -> None:
    """Write the graph as 'u v' lines plus a JSON sidecar {n, seed, source}."""
    iu, iv = np.nonzero(np.triu(g.adjacency, k=1))
    with open(path, "w") as fh:
        for u, v in zip(iu, iv):
            fh.write(f"{u} {v}\n")
    if sidecar:
        meta = {"n": g.n, "seed": g.seed, "source": g.source}
        with open(f"{path}.json", "w") as fh:
            json.dump(meta, fh)
            fh.write("\n")
