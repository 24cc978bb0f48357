"""Centrality measures for network, path, and multi-order models.

Six measures: betweenness, closeness (harmonic), path end, path continuation,
path reach, and visitation. Path-end, continuation, reach, and visitation need
information about where paths start and end, so they are undefined for plain
network models.

Multi-order values are computed analytically from the model's start
distribution and fundamental matrix and can be projected to first order:
betweenness / path end / visitation project by summation over states sharing a
final node, continuation and reach by visitation-weighted averaging.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

import networkx as nx

from .errors import DataError, UnsupportedMeasureError
from .models import MOGenModel, NetworkModel, PathModel
from .pathdata import PathDataset

MEASURES = (
    "betweenness",
    "closeness",
    "path_end",
    "path_continuation",
    "path_reach",
    "visitation",
)
#: Measures that require path start/end information.
PATH_MEASURES = frozenset(
    {"path_end", "path_continuation", "path_reach", "visitation"}
)

State = tuple[str, ...]


@dataclass(frozen=True)
class CentralityVector:
    measure: str
    model_kind: str
    scores: dict  # first-order node -> value
    state_scores: dict | None = None  # multi-order state -> value (mogen only)


# ---------------------------------------------------------------------------
# sequence statistics on raw path data (path model and ground-truth rankings)

def sequence_scores(ds: PathDataset, measure: str, max_len: int = 1) -> dict:
    """Path-data centrality for every node sequence up to ``max_len``.

    With ``max_len=1`` these are the path-model node centralities; larger
    values score higher-order sequences by their sub-path occurrences.
    """
    if measure not in MEASURES:
        raise DataError(f"unknown measure {measure!r}")
    if measure == "closeness":
        return _sequence_closeness(ds, max_len)
    occ, end_occ, interior, reach_sum = _occurrence_stats(ds, max_len)
    if measure == "betweenness":
        return {s: float(interior[s]) for s in occ}
    if measure == "path_end":
        n = ds.total
        return {s: end_occ[s] / n for s in occ}
    if measure == "path_continuation":
        return {s: 1.0 - end_occ[s] / occ[s] for s in occ}
    if measure == "path_reach":
        return {s: reach_sum[s] / occ[s] for s in occ}
    total = sum(occ.values())
    return {s: occ[s] / total for s in occ}  # visitation


def _occurrence_stats(ds: PathDataset, max_len: int):
    occ: dict = defaultdict(int)
    end_occ: dict = defaultdict(int)
    interior: dict = defaultdict(int)
    reach_sum: dict = defaultdict(int)
    for p in ds.paths:
        nodes, w, l = p.nodes, p.multiplicity, len(p.nodes)
        for j in range(l):
            for m in range(1, min(max_len, j + 1) + 1):
                s = nodes[j - m + 1 : j + 1]
                occ[s] += w
                reach_sum[s] += w * (l - 1 - j)
                if j == l - 1:
                    end_occ[s] += w
                if j - m + 1 >= 1 and j <= l - 2:
                    interior[s] += w
    return occ, end_occ, interior, reach_sum


def subpath_distances(ds: PathDataset, max_len: int = 1) -> dict:
    """Shortest observed sub-path distance between sequence occurrences.

    The distance between sequences s and t is the minimum number of
    transitions between an occurrence of s and a later occurrence of t on the
    same path (measured between occurrence end positions).
    """
    dist: dict = {}
    for p in ds.paths:
        nodes, l = p.nodes, len(p.nodes)
        for a in range(l):
            s_opts = [nodes[a - m + 1 : a + 1] for m in range(1, min(max_len, a + 1) + 1)]
            for b in range(a + 1, l):
                d = b - a
                for t_len in range(1, min(max_len, b + 1) + 1):
                    t = nodes[b - t_len + 1 : b + 1]
                    for s in s_opts:
                        key = (s, t)
                        if key not in dist or d < dist[key]:
                            dist[key] = d
    return dist


def _sequence_closeness(ds: PathDataset, max_len: int) -> dict:
    occ, _, _, _ = _occurrence_stats(ds, max_len)
    dist = subpath_distances(ds, max_len)
    sums: dict = {s: 0.0 for s in occ}
    for (s, t), d in dist.items():
        if s != t:
            sums[s] += 1.0 / d
    return sums


# ---------------------------------------------------------------------------
# network model

def _digraph(model: NetworkModel) -> nx.DiGraph:
    g = nx.DiGraph()
    g.add_nodes_from(model.vocabulary)
    for (a, b), w in model.edges.items():
        g.add_edge(a, b, weight=w)
    return g


def _network_betweenness(model: NetworkModel) -> dict:
    g = _digraph(model)
    return dict(nx.betweenness_centrality(g, normalized=False))


def _network_closeness(model: NetworkModel, direction: str = "out") -> dict:
    g = _digraph(model)
    if direction == "in":
        g = g.reverse()
    scores = {v: 0.0 for v in g}
    for v, lengths in nx.all_pairs_shortest_path_length(g):
        scores[v] = sum(1.0 / d for u, d in lengths.items() if u != v)
    return scores


# ---------------------------------------------------------------------------
# multi-order model

def mogen_state_scores(
    model: MOGenModel, measure: str, literal_end_term: bool = False
) -> dict:
    """Per-state analytic centrality values.

    Betweenness is reported in expected interior-occurrence counts over the
    training dataset, matching the path-model counting convention. With
    ``literal_end_term`` the per-state absorption probability is subtracted
    directly instead of the expected number of terminations.
    """
    sf = model.expected_visits()
    r = model.end_p
    s0 = model.start_p
    if measure == "betweenness":
        if literal_end_term:
            vals = (sf - s0 - r) * model.n_paths
        else:
            vals = (sf - s0) * (1.0 - r) * model.n_paths
    elif measure == "path_end":
        vals = sf * r
    elif measure == "path_continuation":
        vals = 1.0 - r
    elif measure == "path_reach":
        vals = model.reach_totals() - 1.0
    elif measure == "visitation":
        vals = sf / sf.sum()
    elif measure == "closeness":
        dists = _state_distances(model)
        return {
            s: sum(1.0 / d for t, d in dists[i].items() if t != i)
            for i, s in enumerate(model.states)
        }
    else:
        raise DataError(f"unknown measure {measure!r}")
    return {s: float(vals[i]) for i, s in enumerate(model.states)}


def _state_adjacency(model: MOGenModel) -> list:
    adj = [[] for _ in range(model.n_states)]
    coo = model.trans_p.tocoo()
    for i, j in zip(coo.row, coo.col):
        adj[i].append(j)
    return adj


def _bfs(adj: list, sources: list) -> dict:
    dist = {s: 0 for s in sources}
    queue = deque(sources)
    while queue:
        i = queue.popleft()
        for j in adj[i]:
            if j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    return dist


def _state_distances(model: MOGenModel) -> list:
    adj = _state_adjacency(model)
    return [_bfs(adj, [i]) for i in range(model.n_states)]


def _mogen_fo_closeness(model: MOGenModel) -> dict:
    """First-order harmonic closeness over the multi-order topology.

    The first-order distance between nodes u and w is the minimum state-graph
    distance over state pairs ending in u and w respectively.
    """
    adj = _state_adjacency(model)
    by_last: dict = defaultdict(list)
    for i, s in enumerate(model.states):
        by_last[s[-1]].append(i)
    last = [s[-1] for s in model.states]
    scores = {}
    for u, sources in by_last.items():
        dist = _bfs(adj, sources)
        best: dict = {}
        for i, d in dist.items():
            w = last[i]
            if w != u and (w not in best or d < best[w]):
                best[w] = d
        scores[u] = sum(1.0 / d for d in best.values() if d > 0)
    return scores


def _project_first_order(model: MOGenModel, measure: str, state_vals: dict) -> dict:
    sf = model.expected_visits()
    sums: dict = defaultdict(float)
    weights: dict = defaultdict(float)
    for i, s in enumerate(model.states):
        v = s[-1]
        if measure in ("betweenness", "path_end"):
            sums[v] += state_vals[s]
        elif measure == "visitation":
            sums[v] += sf[i]
        else:  # continuation / reach: visitation-weighted average
            sums[v] += sf[i] * state_vals[s]
            weights[v] += sf[i]
    if measure == "visitation":
        total = sum(sums.values())
        return {v: val / total for v, val in sums.items()}
    if measure in ("betweenness", "path_end"):
        return dict(sums)
    return {v: (sums[v] / weights[v] if weights[v] > 0 else 0.0) for v in sums}


# ---------------------------------------------------------------------------
# public API

def compute(model, measure: str, direction: str = "out", literal_end_term: bool = False) -> CentralityVector:
    """Compute a centrality measure for any fitted model."""
    if measure not in MEASURES:
        raise DataError(f"unknown measure {measure!r}")
    if isinstance(model, NetworkModel):
        if measure in PATH_MEASURES:
            raise UnsupportedMeasureError(
                f"{measure} cannot be computed for a network model"
            )
        if measure == "betweenness":
            return CentralityVector(measure, "network", _network_betweenness(model))
        return CentralityVector(measure, "network", _network_closeness(model, direction))
    if isinstance(model, PathModel):
        scores = sequence_scores(model.dataset, measure, max_len=1)
        return CentralityVector(measure, "path", {s[0]: v for s, v in scores.items()})
    if isinstance(model, MOGenModel):
        if measure == "closeness":
            state_vals = None
            fo = _mogen_fo_closeness(model)
        else:
            state_vals = mogen_state_scores(model, measure, literal_end_term)
            fo = _project_first_order(model, measure, state_vals)
        return CentralityVector(measure, "mogen", fo, state_vals)
    raise DataError(f"unsupported model type {type(model).__name__}")


def betweenness(model, literal_end_term: bool = False) -> CentralityVector:
    return compute(model, "betweenness", literal_end_term=literal_end_term)


def closeness(model, direction: str = "out") -> CentralityVector:
    return compute(model, "closeness", direction=direction)


def path_end(model) -> CentralityVector:
    return compute(model, "path_end")


def path_continuation(model) -> CentralityVector:
    return compute(model, "path_continuation")


def path_reach(model) -> CentralityVector:
    return compute(model, "path_reach")


def visitation(model) -> CentralityVector:
    return compute(model, "visitation")


@dataclass(frozen=True)
class EdgeCentralityReport:
    """Centralities of order-2 states above a visitation-share threshold."""

    min_visitation: float
    shares: dict  # order-2 state -> visitation share
    values: dict  # order-2 state -> {measure: value}

    def by_source(self, node: str) -> dict:
        return {s: v for s, v in self.values.items() if s[0] == node}

    def by_target(self, node: str) -> dict:
        return {s: v for s, v in self.values.items() if s[-1] == node}


def edge_centralities(
    model: MOGenModel,
    measures=MEASURES,
    min_visitation: float = 0.02,
) -> EdgeCentralityReport:
    """Per order-2-state centralities, filtered by total visitation share."""
    if model.order < 2:
        raise DataError("edge centralities require a model of order >= 2")
    sf = model.expected_visits()
    total = sf.sum()
    selected = {
        s: sf[i] / total
        for i, s in enumerate(model.states)
        if len(s) == 2 and sf[i] / total >= min_visitation
    }
    values: dict = {s: {} for s in selected}
    for measure in measures:
        state_vals = mogen_state_scores(model, measure)
        for s in selected:
            values[s][measure] = float(state_vals[s])
    return EdgeCentralityReport(min_visitation, selected, values)
