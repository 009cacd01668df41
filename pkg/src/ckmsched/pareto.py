"""Multi-criteria label-correcting DP over the schedule DAG.

Labels carry additive (F, G, C) statistics. A label dominates another when it has
no more working time G, no more cost C and no less efficacy F, with one strict.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .dag import Dag
from .efficacy import PathStats, Schedule
from .errors import CorruptBackpointer, EmptyFrontier

SOURCE = -1  # backpointer marker for the source label


def dominates(a: PathStats, b: PathStats) -> bool:
    return (
        a.G <= b.G and a.C <= b.C and a.F >= b.F
        and (a.G < b.G or a.C < b.C or a.F > b.F)
    )


def eps_dominates(a: PathStats, b: PathStats, eps: float) -> bool:
    """Relaxed test: F_a >= (1-eps) F_b, G_a <= (1+eps) G_b, C_a <= (1+eps) C_b."""
    return a.F >= (1.0 - eps) * b.F and a.G <= (1.0 + eps) * b.G and a.C <= (1.0 + eps) * b.C


@dataclass(frozen=True)
class Label:
    stats: PathStats
    vertex: int
    index: int  # position within the vertex frontier
    pred_vertex: int = SOURCE
    pred_label: int = SOURCE
    edge_id: int = SOURCE


@dataclass
class Frontier:
    """Mutually non-dominated labels at one vertex, stored column-wise.

    ``key_down``/``key_cost`` are the exact dyadic sums used for dominance inside the
    DP (see ``Dag``); frontiers built from bare labels leave them empty.
    """

    vertex: int
    F: np.ndarray = field(default_factory=lambda: np.empty(0))
    G: np.ndarray = field(default_factory=lambda: np.empty(0))
    C: np.ndarray = field(default_factory=lambda: np.empty(0))
    pred_vertex: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    pred_label: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    edge_id: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    key_down: np.ndarray = field(default_factory=lambda: np.empty(0))
    key_cost: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __len__(self) -> int:
        return self.F.size

    def label(self, i: int) -> Label:
        return Label(
            PathStats(float(self.F[i]), float(self.G[i]), float(self.C[i])),
            self.vertex, i,
            int(self.pred_vertex[i]), int(self.pred_label[i]), int(self.edge_id[i]),
        )

    def labels(self) -> list[Label]:
        return [self.label(i) for i in range(len(self))]

    def take(self, idx: np.ndarray) -> Frontier:
        keyed = self.key_down.size == self.F.size
        return Frontier(self.vertex, self.F[idx], self.G[idx], self.C[idx],
                        self.pred_vertex[idx], self.pred_label[idx], self.edge_id[idx],
                        self.key_down[idx] if keyed else np.empty(0),
                        self.key_cost[idx] if keyed else np.empty(0))

    @classmethod
    def from_labels(cls, vertex: int, labels: list[Label]) -> Frontier:
        fr = cls(vertex)
        for lab in labels:
            fr, _ = insert_nondominated(fr, lab)
        return fr


def _append(fr: Frontier, lab: Label) -> Frontier:
    return Frontier(
        fr.vertex,
        np.append(fr.F, lab.stats.F), np.append(fr.G, lab.stats.G), np.append(fr.C, lab.stats.C),
        np.append(fr.pred_vertex, lab.pred_vertex), np.append(fr.pred_label, lab.pred_label),
        np.append(fr.edge_id, lab.edge_id),
    )


def insert_nondominated(frontier: Frontier, label: Label) -> tuple[Frontier, bool]:
    """Insert unless weakly dominated (exact duplicates keep the earlier label)."""
    s = label.stats
    covered = (frontier.G <= s.G) & (frontier.C <= s.C) & (frontier.F >= s.F)
    if covered.any():
        return frontier, False
    beaten = (frontier.G >= s.G) & (frontier.C >= s.C) & (frontier.F <= s.F)
    kept = frontier.take(np.flatnonzero(~beaten))
    return _append(kept, label), True


def nondominated_order(F: np.ndarray, G: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Indices of the non-dominated points, first occurrence kept among exact ties.

    Points are swept in (G asc, C asc, F desc, position asc) order, so every potential
    dominator of a point is visited before it. A point survives iff no survivor has
    C <= its C and F >= its F. The survivors form a staircase in (C, F) that is kept
    sorted by C with strictly increasing F, which makes each query one bisection.
    """
    n = F.size
    if n <= 1:
        return np.arange(n)
    order = np.lexsort((np.arange(n), -F, C, G))
    keep = []
    stair_c: list[float] = []
    stair_f: list[float] = []
    for i in order.tolist():
        c, f = C[i], F[i]
        pos = bisect.bisect_right(stair_c, c)
        if pos and stair_f[pos - 1] >= f:
            continue
        keep.append(i)
        # drop staircase steps at C >= c whose F no longer exceeds f
        end = pos
        while end < len(stair_c) and stair_f[end] <= f:
            end += 1
        if pos and stair_c[pos - 1] == c:
            pos -= 1
        stair_c[pos:end] = [c]
        stair_f[pos:end] = [f]
    return np.sort(np.asarray(keep, dtype=np.int64))


def epsilon_prune(frontier: Frontier, eps: float) -> Frontier:
    """Greedy sweep in (G asc, C asc, F desc) order; a label is dropped when an already
    retained label eps-dominates it. eps=0 reduces to weak-dominance pruning."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    n = len(frontier)
    if n <= 1:
        return frontier
    F, G, C = frontier.F, frontier.G, frontier.C
    order = np.lexsort((np.arange(n), -F, C, G))
    kept: list[int] = []
    for i in order.tolist():
        if kept:
            k = np.asarray(kept)
            if np.any((F[k] >= (1.0 - eps) * F[i]) & (G[k] <= (1.0 + eps) * G[i]) & (C[k] <= (1.0 + eps) * C[i])):
                continue
        kept.append(i)
    return frontier.take(np.sort(np.asarray(kept, dtype=np.int64)))


@dataclass
class ParetoResult:
    dag: Dag
    frontiers: list[Frontier]  # one per grid vertex, plus the sink at index n
    candidates: int = 0  # labels generated before pruning (diagnostic)

    @property
    def sink(self) -> Frontier:
        return self.frontiers[self.dag.sink]

    def recover(self, label: Label) -> Schedule:
        return recover_schedule(label, self.dag, self.frontiers)

    def sizes(self) -> np.ndarray:
        return np.array([len(f) for f in self.frontiers])


def _gather(dag: Dag, frontiers: list[Frontier], v: int, sink: bool) -> Frontier:
    parts_F, parts_G, parts_C, pv, pl, eid, kd, kc = [], [], [], [], [], [], [], []
    if sink:
        for u in range(dag.n):
            fu = frontiers[u]
            m = len(fu)
            if m == 0:
                continue
            parts_F.append(fu.F + dag.term_dF[u])
            parts_G.append(fu.G + dag.term_dG[u])
            parts_C.append(fu.C)
            kd.append(fu.key_down)
            kc.append(fu.key_cost)
            pv.append(np.full(m, u))
            pl.append(np.arange(m))
            eid.append(np.full(m, dag.terminal_edge_id(u)))
    else:
        for e in range(dag.in_ptr[v], dag.in_ptr[v + 1]):
            u = dag.src[e]
            fu = frontiers[u]
            m = len(fu)
            if m == 0:
                continue
            parts_F.append(fu.F + dag.dF[e])
            parts_G.append(fu.G + dag.dG[e])
            parts_C.append(fu.C + dag.dC[e])
            kd.append(fu.key_down + dag.key_down[e])
            kc.append(fu.key_cost + dag.key_cost[e])
            pv.append(np.full(m, u))
            pl.append(np.arange(m))
            eid.append(np.full(m, e))
    if not parts_F:
        return Frontier(v)
    cat = np.concatenate
    return Frontier(v, cat(parts_F), cat(parts_G), cat(parts_C), cat(pv), cat(pl), cat(eid), cat(kd), cat(kc))


@dataclass
class IncumbentBound:
    """Discards labels that cannot be completed into a schedule with J >= ``j_lb``.

    A label (F, G, C) extended by a suffix (f, g, c) reaches J >= j_lb iff

        F - G (j_lb + C/H) + [f - g (j_lb + C/H) - c G/H - g c/H] >= 0.

    The bracket is bounded from a table of V(v; kg, kc) = max over suffixes leaving v
    of f - kg g - kc c, tabulated at working-time prices j_lb + ``off_g`` and cost
    prices ``kap_c`` (see ``_kernels.suffix_cap``). Any schedule with J >= j_lb has
    C/H <= 1 - j_lb, so ``off_g`` only spans that range.
    """

    j_lb: float
    H: float
    off_g: np.ndarray
    kap_c: np.ndarray
    table: np.ndarray  # (len(off_g), len(kap_c), n + 1); the sink column is zero
    slack: float = 1e-9

    @classmethod
    def build(cls, dag: Dag, H: float, j_lb: float, cost_levels: int = 101, time_levels: int = 21) -> IncumbentBound:
        from ._kernels import suffix_table

        off_g = np.linspace(0.0, max(1.0 - j_lb, 1e-3), cost_levels)
        kap_c = np.linspace(0.0, 1.0, time_levels)
        table = suffix_table(dag.n, dag.src, dag.in_ptr, dag.dF, dag.dG, dag.dC,
                             dag.term_dF, dag.term_dG, j_lb + off_g, kap_c)
        return cls(j_lb, H, off_g, kap_c, table, 1e-9 * H)

    def __call__(self, v: int, F: np.ndarray, G: np.ndarray, C: np.ndarray) -> np.ndarray:
        from ._kernels import bound_keep

        return bound_keep(self.table, v, self.off_g, self.kap_c, np.asarray(F, dtype=float),
                          np.asarray(G, dtype=float), np.asarray(C, dtype=float), self.H, self.j_lb, self.slack)


def pareto_frontier_dp(
    dag: Dag,
    eps: float = 0.0,
    max_labels: int | None = None,
    bound: IncumbentBound | None = None,
    backend: str = "compiled",
) -> ParetoResult:
    """One topological pass; with eps=0, no cap and no bound the sink frontier is the
    exact Pareto frontier of all source-to-sink paths.

    ``max_labels`` caps each vertex frontier (keeping the highest-F labels) and voids
    the exactness guarantee. ``bound`` drops candidates that cannot beat an incumbent
    before the dominance filter. ``backend="python"`` runs the plain reference loop.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if backend == "python":
        return _frontier_dp_python(dag, eps, max_labels, bound)
    if backend != "compiled":
        raise ValueError(f"unknown backend {backend!r}")
    from ._kernels import frontier_dp

    if bound is None:
        args = (False, np.zeros(1), np.zeros(1), np.zeros((1, 1, 1)), 1.0, 0.0, 0.0)
    else:
        args = (True, bound.off_g, bound.kap_c, bound.table, bound.H, bound.j_lb, bound.slack)
    F, G, C, KD, KC, PV, PL, EI, start, size, generated = frontier_dp(
        dag.n, dag.src, dag.in_ptr, dag.dF, dag.dG, dag.dC, dag.key_down, dag.key_cost,
        dag.term_dF, dag.term_dG, dag.num_update_edges, float(eps), int(max_labels or 0), *args,
    )
    frontiers = []
    for v in range(dag.n + 1):
        s = slice(start[v], start[v] + size[v])
        frontiers.append(Frontier(v, F[s], G[s], C[s], PV[s], PL[s], EI[s], KD[s], KC[s]))
    return ParetoResult(dag, frontiers, int(generated))


def _frontier_dp_python(dag: Dag, eps: float, max_labels: int | None,
                        bound: IncumbentBound | None) -> ParetoResult:
    frontiers: list[Frontier] = [Frontier(0, np.zeros(1), np.zeros(1), np.zeros(1), np.full(1, SOURCE),
                                          np.full(1, SOURCE), np.full(1, SOURCE), np.zeros(1), np.zeros(1))]
    generated = 0
    for v in range(1, dag.n + 1):
        cand = _gather(dag, frontiers, v, sink=(v == dag.sink))
        generated += len(cand)
        if bound is not None and len(cand):
            cand = cand.take(np.flatnonzero(bound(v, cand.F, cand.G, cand.C)))
        fr = cand.take(nondominated_order(cand.F, -cand.key_down, cand.key_cost)) if len(cand) else cand
        if eps > 0:
            fr = epsilon_prune(fr, eps)
        if max_labels is not None and len(fr) > max_labels:
            fr = fr.take(np.sort(np.argsort(-fr.F, kind="stable")[:max_labels]))
        frontiers.append(fr)
    return ParetoResult(dag, frontiers, generated)


def recover_schedule(label: Label, dag: Dag, frontiers: list[Frontier]) -> Schedule:
    """Follow backpointers to the source; completions are the heads of update edges."""
    times = []
    v, i, e = label.vertex, label.index, label.edge_id
    pv, pl = label.pred_vertex, label.pred_label
    steps = 0
    while pv != SOURCE:
        if e < 0 or e >= dag.num_edges or steps > dag.n + 1:
            raise CorruptBackpointer(f"bad edge id {e} at vertex {v}")
        edge = dag.edge(e)
        if edge.from_index != pv or edge.to_index != v:
            raise CorruptBackpointer(f"edge {e} does not connect {pv}->{v}")
        if v != dag.sink:
            times.append(float(dag.times[v]))
        fr = frontiers[pv]
        if not (0 <= pl < len(fr)):
            raise CorruptBackpointer(f"label {pl} missing at vertex {pv}")
        v, i = pv, pl
        pv, pl, e = int(fr.pred_vertex[i]), int(fr.pred_label[i]), int(fr.edge_id[i])
        steps += 1
    if v != 0:
        raise CorruptBackpointer(f"chain ended at vertex {v}, not the source")
    return Schedule(tuple(sorted(times)))


def score(stats: PathStats, lam: float, mu: float, H: float) -> float:
    """H F - G (C + (lam - mu) H); equal to the Dinkelbach residual of the label."""
    return H * stats.F - stats.G * (stats.C + (lam - mu) * H)


def select_best(frontier: Frontier, lam: float, mu: float, H: float, g_floor: float = 0.0) -> Label:
    """Maximise the score; ties prefer smaller C, then larger G.

    Labels with G below ``g_floor`` are ineligible.
    """
    if len(frontier) == 0:
        raise EmptyFrontier("cannot select from an empty frontier")
    eligible = frontier.G >= g_floor
    if not eligible.any():
        raise EmptyFrontier("no label has positive working time")
    s = H * frontier.F - frontier.G * (frontier.C + (lam - mu) * H)
    s = np.where(eligible, s, -np.inf)
    best = s.max()
    cand = np.flatnonzero(s == best)
    if cand.size > 1:
        cand = cand[np.lexsort((-frontier.G[cand], frontier.C[cand]))]
    return frontier.label(int(cand[0]))
