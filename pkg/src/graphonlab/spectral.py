"""Random-walk chains: stationary laws, powers, mixing times, conductance.

The walk on a graph has transition matrix P = D^{-1} A and stationary law
pi(v) = deg(v) / sum(deg). Mixing is measured in worst-start total variation.
The bottleneck ratio is exact (exhaustive over vertex subsets) up to a size
limit; the conductance/spectral-gap sandwich is checked with the exact value
only. Bipartite toys never mix; the lazy transform (P+I)/2 is offered as an
explicit escape hatch rather than applied silently.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .errors import (
    Disconnected,
    GraphTooLarge,
    InvalidModel,
    IsolatedVertex,
    NotMixed,
)
from .sampling import SampledGraph

_ROW_SUM_TOL = 1e-12
_FIXED_POINT_TOL = 1e-10
_DEFAULT_EXHAUSTIVE_LIMIT = 20


def rw_transition_matrix(g: SampledGraph) -> np.ndarray:
    """D^{-1} A; rows sum to 1. Raises IsolatedVertex on degree-0 vertices."""
    deg = g.degrees()
    zero = np.flatnonzero(deg == 0)
    if zero.size:
        raise IsolatedVertex(int(zero[0]))
    return g.adjacency.astype(float) / deg[:, None].astype(float)


def is_connected(g: SampledGraph) -> bool:
    n = g.n
    adj = g.adjacency
    seen = np.zeros(n, dtype=bool)
    frontier = np.zeros(n, dtype=bool)
    frontier[0] = seen[0] = True
    while frontier.any():
        reach = (adj[frontier].sum(axis=0) > 0) & ~seen
        seen |= reach
        frontier = reach
    return bool(seen.all())


def is_bipartite(g: SampledGraph) -> bool:
    """2-colorability; on a connected graph this is exactly walk periodicity.

    Periodic walks have lambda_min = -1, so the absolute spectral gap
    vanishes and Cheeger-style statements only make sense for the lazy chain.
    """
    n = g.n
    color = np.full(n, -1, dtype=np.int8)
    for root in range(n):
        if color[root] != -1:
            continue
        color[root] = 0
        stack = [root]
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(g.adjacency[v]):
                if color[u] == -1:
                    color[u] = 1 - color[v]
                    stack.append(int(u))
                elif color[u] == color[v]:
                    return False
    return True


def stationary(g: SampledGraph) -> np.ndarray:
    """pi(v) = deg(v)/sum(deg), the walk's stationary law on a connected graph."""
    if not is_connected(g):
        raise Disconnected("stationary law not unique on a disconnected graph")
    deg = g.degrees().astype(float)
    pi = deg / deg.sum()
    return pi


@dataclass(frozen=True)
class RWChain:
    """Row-stochastic transition matrix with its stationary distribution."""

    P: np.ndarray
    pi: np.ndarray
    graph: SampledGraph | None = None

    def __post_init__(self):
        P = np.asarray(self.P, dtype=float).copy()
        pi = np.asarray(self.pi, dtype=float).copy()
        n = P.shape[0]
        if P.shape != (n, n) or pi.shape != (n,):
            raise InvalidModel("P must be square and pi its length")
        if np.abs(P.sum(axis=1) - 1.0).max() > _ROW_SUM_TOL:
            raise InvalidModel("P rows must sum to 1")
        if (pi <= 0).any() or abs(pi.sum() - 1.0) > _ROW_SUM_TOL:
            raise InvalidModel("pi must be positive and sum to 1")
        if np.abs(pi @ P - pi).max() > _FIXED_POINT_TOL:
            raise InvalidModel("pi is not a fixed point of P")
        P.setflags(write=False)
        pi.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "pi", pi)

    @classmethod
    def from_graph(cls, g: SampledGraph) -> "RWChain":
        return cls(rw_transition_matrix(g), stationary(g), graph=g)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def lazy(self) -> "RWChain":
        """Chain (P + I)/2; aperiodic, same stationary law."""
        return RWChain(
            (self.P + np.eye(self.n)) / 2.0, self.pi, graph=self.graph
        )

    def limit_matrix(self) -> np.ndarray:
        """P^infinity: every row a copy of pi."""
        return np.tile(self.pi, (self.n, 1))


@dataclass(frozen=True)
class MixingReport:
    """Mixing-time search result plus spectral summary.

    ``worst_row_tv_trace`` holds (t, worst-start TV) pairs for every step
    visited; ``fitted_slope`` is t_mix / log(n/eps), the empirical constant in
    the log-mixing law. ``bottleneck`` stays None unless filled by the caller.
    """

    eps: float
    t_mix: int
    worst_row_tv_trace: tuple
    gap: float
    relaxation_time: float
    bottleneck: float | None = None
    fitted_slope: float | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "eps": self.eps,
                "t_mix": self.t_mix,
                "worst_row_tv_trace": [list(p) for p in self.worst_row_tv_trace],
                "gap": self.gap,
                "relaxation_time": self.relaxation_time,
                "bottleneck": self.bottleneck,
                "fitted_slope": self.fitted_slope,
            }
        )


def worst_row_tv(Pt: np.ndarray, pi: np.ndarray) -> float:
    """max over start vertices of TV(row of P^t, pi)."""
    return float(0.5 * np.abs(Pt - pi).sum(axis=1).max())


def matrix_power(P: np.ndarray, t: int) -> np.ndarray:
    """P^t by binary powering. Rows stay stochastic to ~1e-9 at desk scale."""
    if t < 0:
        raise InvalidModel("t must be nonnegative")
    return np.linalg.matrix_power(np.asarray(P, dtype=float), t)


def mixing_time(chain: RWChain, eps: float, t_max: int) -> MixingReport:
    """Smallest t <= t_max with worst-start TV at most eps.

    Accumulates P^t with one dense multiplication per step and evaluates all
    start rows exactly. Raises NotMixed (carrying the partial trace) if the
    horizon is exhausted, e.g. for periodic or disconnected chains.
    """
    if not 0.0 < eps or t_max < 1:
        raise InvalidModel("need eps > 0 and t_max >= 1")
    P = chain.P
    pi = chain.pi
    Pt = np.eye(chain.n)
    trace = []
    t_hit = None
    for t in range(t_max + 1):
        tv = worst_row_tv(Pt, pi)
        trace.append((t, tv))
        if tv <= eps:
            t_hit = t
            break
        if t < t_max:
            Pt = Pt @ P
    if t_hit is None:
        raise NotMixed(t_max, trace)
    gap = spectral_gap(chain)
    log_arg = chain.n / eps
    slope = t_hit / np.log(log_arg) if log_arg > 1.0 else None
    return MixingReport(
        eps=eps,
        t_mix=t_hit,
        worst_row_tv_trace=tuple(trace),
        gap=gap,
        relaxation_time=np.inf if gap == 0 else 1.0 / gap,
        fitted_slope=slope,
    )


def power_limit_gap(chain: RWChain, t: int) -> float:
    """Max-entry distance between P^t and the stationary limit matrix."""
    Pt = matrix_power(chain.P, t)
    return float(np.abs(Pt - chain.pi).max())


def spectral_gap(chain: RWChain) -> float:
    """Absolute spectral gap 1 - max(|lambda_2|, |lambda_n|).

    Computed on the symmetric conjugate D_pi^{1/2} P D_pi^{-1/2}, which for
    reversible chains has a real spectrum and is solved through LAPACK's
    symmetric (tridiagonalization) path.
    """
    s = np.sqrt(chain.pi)
    S = (s[:, None] * chain.P) / s[None, :]
    if np.abs(S - S.T).max() > 1e-8:
        raise InvalidModel("chain is not reversible; symmetric conjugate failed")
    S = (S + S.T) / 2.0
    vals = eigh(S, eigvals_only=True)  # ascending; top (=1) is the pi direction
    if vals.size < 2:
        return 1.0
    return float(max(0.0, 1.0 - np.abs(vals[:-1]).max()))


def _subset_cut_and_volume(adjacency, degrees, limit_mass):
    """Exhaustive Phi minimization helper; yields min cut/vol over valid S."""
    n = adjacency.shape[0]
    A = adjacency.astype(np.float64)
    best = np.inf
    chunk = 1 << 14
    masks_total = 1 << n
    bits = np.arange(n)
    deg = degrees.astype(np.float64)
    for start in range(1, masks_total, chunk):
        stop = min(start + chunk, masks_total)
        masks = np.arange(start, stop, dtype=np.int64)
        member = ((masks[:, None] >> bits) & 1).astype(np.float64)
        vol = member @ deg
        ok = (vol > 0) & (vol <= limit_mass)
        if not ok.any():
            continue
        member = member[ok]
        vol = vol[ok]
        inside = np.einsum("ij,ij->i", member @ A, member)
        cut = vol - inside
        ratio = cut / vol
        m = ratio.min()
        if m < best:
            best = m
    return float(best)


def bottleneck_ratio(
    g: SampledGraph, exhaustive_limit: int = _DEFAULT_EXHAUSTIVE_LIMIT
) -> float:
    """min over S with pi(S) <= 1/2 of |boundary(S)| / volume(S).

    Exact (exhaustive over all subsets) for n <= exhaustive_limit. Beyond the
    limit a sampled upper bound over random subsets and degree-sorted sweep
    cuts is returned and flagged with a UserWarning; the heuristic value is
    only an upper bound on the true ratio.
    """
    if not is_connected(g):
        raise Disconnected("bottleneck ratio needs a connected graph")
    deg = g.degrees()
    total = float(deg.sum())
    limit_mass = total / 2.0
    if g.n <= exhaustive_limit:
        return _subset_cut_and_volume(g.adjacency, deg, limit_mass)

    warnings.warn(
        "graph exceeds the exhaustive limit; returning a heuristic "
        "upper bound on the bottleneck ratio",
        stacklevel=2,
    )
    A = g.adjacency.astype(np.float64)
    degf = deg.astype(np.float64)

    def ratio_of(mask):
        vol = float(degf[mask].sum())
        if vol == 0 or vol > limit_mass:
            return np.inf
        inside = float(A[np.ix_(mask, mask)].sum())
        return (vol - inside) / vol

    best = np.inf
    order = np.argsort(-degf, kind="stable")
    for cut_len in range(1, g.n):
        mask = np.zeros(g.n, dtype=bool)
        mask[order[:cut_len]] = True
        best = min(best, ratio_of(mask))
    rng = np.random.default_rng(0xB0771E)
    for _ in range(512):
        size = int(rng.integers(1, g.n))
        mask = np.zeros(g.n, dtype=bool)
        mask[rng.choice(g.n, size=size, replace=False)] = True
        best = min(best, ratio_of(mask))
    return float(best)


@dataclass(frozen=True)
class CheegerReport:
    """Exact conductance, absolute gap, and the sandwich bounds."""

    phi: float
    gap: float
    lower: float
    upper: float
    holds: bool
    lazy: bool


def cheeger_check(
    g: SampledGraph,
    lazy: bool = False,
    exhaustive_limit: int = _DEFAULT_EXHAUSTIVE_LIMIT,
) -> CheegerReport:
    """Assert phi^2/2 <= gap <= 2*phi with the exhaustive bottleneck ratio.

    Heuristic bottleneck values are never used here: an upper bound on phi
    would make the left inequality vacuous. With ``lazy`` both sides refer to
    the lazy chain: its conductance is exactly half the graph's.
    """
    if g.n > exhaustive_limit:
        raise GraphTooLarge(
            f"cheeger_check requires exhaustive phi (n <= {exhaustive_limit})"
        )
    phi = bottleneck_ratio(g, exhaustive_limit=exhaustive_limit)
    chain = RWChain.from_graph(g)
    if lazy:
        chain = chain.lazy()
        phi = phi / 2.0
    gap = spectral_gap(chain)
    lower, upper = phi * phi / 2.0, 2.0 * phi
    eps = 1e-9
    return CheegerReport(
        phi=phi,
        gap=gap,
        lower=lower,
        upper=upper,
        holds=bool(lower - eps <= gap <= upper + eps),
        lazy=lazy,
    )
