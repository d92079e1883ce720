"""Application DAG model: representation, validation, generation, rescaling.

A streaming application is a weighted directed acyclic graph whose nodes are
tasks and whose edges carry the data volumes exchanged between tasks.  All
sizes and weights are expressed in bit.  The first task is the root (it reads
the input frame) and the last task is the sink (it renders the result); both
stay on the mobile device by convention, which downstream solvers enforce.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, ParameterError, StructureError

BUILTIN_IDS = ("DAG1", "DAG2", "DAG3", "DAG4")

# Task/edge weight totals (bit) the builtin graphs are rescaled to.  DAG1-3
# use the benchmark totals 3.32/1.66 Mbit; DAG4 defaults to a 4.98 Mbit task
# total with an edge total chosen so its workload-to-traffic ratio is 2.
BUILTIN_TOTALS = {
    "DAG1": (3.32e6, 1.66e6),
    "DAG2": (3.32e6, 1.66e6),
    "DAG3": (3.32e6, 1.66e6),
    "DAG4": (4.98e6, 4.98e6 * 21.0 / (15.0 * 2.0)),
}

# Fixed topologies (root = task 1, sink = task V), as 1-based edge lists.
_TOPOLOGIES = {
    # 9 tasks, 12 edges, mesh: diamonds with crossing paths.
    "DAG1": [(1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (3, 6), (4, 6),
             (5, 7), (5, 8), (6, 8), (7, 9), (8, 9)],
    # 9 tasks, 11 edges, tree: every intermediate task has exactly one parent.
    "DAG2": [(1, 2), (1, 3), (2, 4), (2, 5), (3, 6), (3, 7), (4, 8),
             (5, 9), (6, 9), (7, 9), (8, 9)],
    # 9 tasks, 11 edges, hybrid: a mesh core with tree-like fringes.
    "DAG3": [(1, 2), (1, 3), (2, 4), (3, 4), (3, 6), (4, 5), (4, 6),
             (5, 7), (6, 8), (7, 9), (8, 9)],
    # 15 tasks, 21 edges: three parallel sub-graphs (fork / two chains /
    # tree) sharing root 1 and sink 15.
    "DAG4": [(1, 2), (2, 3), (2, 4), (2, 5), (3, 15), (4, 15), (5, 15),
             (1, 6), (6, 7), (7, 15), (1, 8), (8, 9), (9, 15),
             (1, 10), (10, 11), (10, 12), (11, 13), (11, 14), (12, 15),
             (13, 15), (14, 15)],
}


@dataclass(frozen=True)
class ApplicationDag:
    """Immutable weighted task graph.

    adjacency    -- (V, V) binary matrix, a[i, j] = 1 iff edge i -> j
    edge_weights -- (V, V) matrix of edge data volumes (bit), 0 off-edges
    task_sizes   -- length-V vector of task workloads (bit)
    priorities   -- length-V vector of scheduling weights (used by the
                    processor-sharing service discipline only)
    """

    adjacency: np.ndarray
    edge_weights: np.ndarray
    task_sizes: np.ndarray
    priorities: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=np.int64)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise StructureError("adjacency must be a square matrix")
        v = adj.shape[0]
        if v < 2:
            raise StructureError("a DAG needs at least a root and a sink task")
        wts = np.asarray(self.edge_weights, dtype=np.float64)
        sizes = np.asarray(self.task_sizes, dtype=np.float64)
        if wts.shape != (v, v):
            raise StructureError("edge_weights must match adjacency shape")
        if sizes.shape != (v,):
            raise StructureError("task_sizes must be a length-V vector")
        prios = self.priorities
        if prios is None:
            prios = np.ones(v)
        prios = np.asarray(prios, dtype=np.float64)
        if prios.shape != (v,):
            raise StructureError("priorities must be a length-V vector")
        for name, arr in (("adjacency", adj), ("edge_weights", wts),
                          ("task_sizes", sizes), ("priorities", prios)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def task_count(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum())

    def edges(self):
        """Yield (i, j, weight_bit) for every edge, 0-based indices."""
        src, dst = np.nonzero(self.adjacency)
        for i, j in zip(src.tolist(), dst.tolist()):
            yield i, j, float(self.edge_weights[i, j])


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: list[tuple[str, str]]


def _reachable_from(adj: np.ndarray, start: int) -> np.ndarray:
    """Boolean reachability vector via breadth-first closure."""
    v = adj.shape[0]
    seen = np.zeros(v, dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            for succ in np.nonzero(adj[node])[0]:
                if not seen[succ]:
                    seen[succ] = True
                    nxt.append(int(succ))
        frontier = nxt
    return seen


def _is_acyclic(adj: np.ndarray) -> bool:
    v = adj.shape[0]
    indeg = adj.sum(axis=0).astype(int)
    queue = [i for i in range(v) if indeg[i] == 0]
    removed = 0
    while queue:
        node = queue.pop()
        removed += 1
        for succ in np.nonzero(adj[node])[0]:
            indeg[succ] -= 1
            if indeg[succ] == 0:
                queue.append(int(succ))
    return removed == v


def validate_dag(dag: ApplicationDag) -> ValidationReport:
    """Check the structural contract of an application DAG.

    Never raises on a merely *invalid* graph: every violated property is
    reported.  Dimension errors are raised by the ApplicationDag constructor
    itself and cannot reach this function.
    """
    adj = dag.adjacency
    v = dag.task_count
    bad: list[tuple[str, str]] = []

    if not np.isin(adj, (0, 1)).all():
        bad.append(("adjacency-binary", "adjacency entries must be 0 or 1"))
    if (dag.edge_weights < 0).any():
        bad.append(("edge-weight-nonnegative", "negative edge weight found"))
    stray = (dag.edge_weights != 0) & (adj == 0)
    if stray.any():
        i, j = np.argwhere(stray)[0]
        bad.append(("edge-weight-support",
                    f"weight on non-edge ({i + 1}, {j + 1})"))
    if (dag.task_sizes <= 0).any():
        bad.append(("task-size-positive", "task sizes must be > 0"))
    if (dag.priorities <= 0).any():
        bad.append(("priority-positive", "priorities must be > 0"))

    if not _is_acyclic(adj):
        bad.append(("acyclicity", "graph contains a directed cycle"))

    indeg = adj.sum(axis=0)
    outdeg = adj.sum(axis=1)
    if indeg[0] != 0:
        bad.append(("root-in-degree", "root task has incoming edges"))
    if outdeg[v - 1] != 0:
        bad.append(("sink-out-degree", "sink task has outgoing edges"))
    for i in range(1, v - 1):
        if indeg[i] < 1:
            bad.append(("in-degree", f"task {i + 1} has no parent"))
        if outdeg[i] < 1:
            bad.append(("out-degree", f"task {i + 1} has no child"))

    from_root = _reachable_from(adj, 0)
    to_sink = _reachable_from(adj.T, v - 1)
    for i in range(1, v - 1):
        if not from_root[i]:
            bad.append(("path-from-root", f"task {i + 1} unreachable from root"))
        if not to_sink[i]:
            bad.append(("path-to-sink", f"task {i + 1} cannot reach the sink"))

    return ValidationReport(ok=not bad, violations=bad)


def cpu_workload(dag: ApplicationDag, pd: float) -> np.ndarray:
    """Per-task CPU cycles for a given processing density (cycle/bit)."""
    if pd <= 0:
        raise ParameterError("processing density must be positive")
    return pd * dag.task_sizes


def ccr(dag: ApplicationDag) -> float:
    """Computing-to-communication ratio: mean task size over mean edge weight."""
    e = dag.edge_count
    if e == 0:
        raise DegenerateInputError("CCR undefined for an edgeless DAG")
    mean_task = float(dag.task_sizes.sum()) / dag.task_count
    mean_edge = float(dag.edge_weights.sum()) / e
    return mean_task / mean_edge


def scale_to_totals(dag: ApplicationDag, task_total: float,
                    edge_total: float) -> ApplicationDag:
    """Rescale sizes and weights so their sums hit the requested totals.

    Topology, priorities and all within-vector ratios are preserved.
    """
    if task_total <= 0 or edge_total <= 0:
        raise ParameterError("target totals must be positive")
    s_sum = float(dag.task_sizes.sum())
    d_sum = float(dag.edge_weights.sum())
    if s_sum <= 0 or d_sum <= 0:
        raise DegenerateInputError("cannot rescale a DAG with zero totals")
    return ApplicationDag(
        adjacency=dag.adjacency.copy(),
        edge_weights=dag.edge_weights * (edge_total / d_sum),
        task_sizes=dag.task_sizes * (task_total / s_sum),
        priorities=dag.priorities.copy(),
    )


def scale_to_ccr(dag: ApplicationDag, target_ccr: float,
                 combined_total: float) -> ApplicationDag:
    """Redistribute a fixed task-plus-edge bit budget to hit a target CCR.

    The sum of task sizes and edge weights stays at ``combined_total`` while
    their split is chosen so the rescaled DAG has exactly the requested
    computing-to-communication ratio.
    """
    if target_ccr <= 0:
        raise ParameterError("target CCR must be positive")
    e = dag.edge_count
    if e == 0:
        raise DegenerateInputError("CCR undefined for an edgeless DAG")
    rho = target_ccr * dag.task_count / e  # task-total / edge-total
    edge_total = combined_total / (1.0 + rho)
    return scale_to_totals(dag, combined_total - edge_total, edge_total)


def builtin_dag(dag_id: str, rng_seed: int = 0) -> ApplicationDag:
    """Instantiate one of the four benchmark topologies.

    Weights are drawn uniformly from [0.5, 1.5) per task/edge and rescaled to
    the documented totals, so two calls with the same seed are identical.
    """
    key = dag_id.upper()
    if key not in _TOPOLOGIES:
        raise ParameterError(f"unknown builtin DAG id: {dag_id!r}")
    edges = _TOPOLOGIES[key]
    v = max(max(i, j) for i, j in edges)
    rng = np.random.default_rng(rng_seed)
    adj = np.zeros((v, v), dtype=np.int64)
    wts = np.zeros((v, v))
    sizes = rng.uniform(0.5, 1.5, size=v)
    for i, j in edges:
        adj[i - 1, j - 1] = 1
        wts[i - 1, j - 1] = rng.uniform(0.5, 1.5)
    task_total, edge_total = BUILTIN_TOTALS[key]
    raw = ApplicationDag(adjacency=adj, edge_weights=wts, task_sizes=sizes)
    return scale_to_totals(raw, task_total, edge_total)


def random_dag(task_count: int, rng_seed: int = 0, edge_prob: float = 0.35,
               task_total: float = 3.32e6,
               edge_total: float = 1.66e6) -> ApplicationDag:
    """Random layered DAG satisfying the structural contract; for tests."""
    if task_count < 2:
        raise ParameterError("need at least two tasks")
    rng = np.random.default_rng(rng_seed)
    v = task_count
    adj = np.zeros((v, v), dtype=np.int64)
    # Spine guarantees every task sits on a root-to-sink path.
    for i in range(v - 1):
        adj[i, i + 1] = 1
    for i in range(v - 1):
        for j in range(i + 2, v):
            if i == 0 and j == v - 1:
                continue  # keep direct root->sink shortcuts rare
            if rng.random() < edge_prob:
                adj[i, j] = 1
    wts = adj * rng.uniform(0.5, 1.5, size=(v, v))
    sizes = rng.uniform(0.5, 1.5, size=v)
    raw = ApplicationDag(adjacency=adj, edge_weights=wts, task_sizes=sizes)
    return scale_to_totals(raw, task_total, edge_total)


def dag_to_dict(dag: ApplicationDag) -> dict:
    return {
        "tasks": dag.task_sizes.tolist(),
        "edges": [[i + 1, j + 1, w] for i, j, w in dag.edges()],
        "priorities": dag.priorities.tolist(),
    }


def dag_from_dict(doc: dict) -> ApplicationDag:
    try:
        sizes = np.asarray(doc["tasks"], dtype=np.float64)
        edges = doc["edges"]
        prios = doc.get("priorities")
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed DAG document: {exc}") from exc
    v = sizes.shape[0]
    adj = np.zeros((v, v), dtype=np.int64)
    wts = np.zeros((v, v))
    for rec in edges:
        i, j, w = int(rec[0]), int(rec[1]), float(rec[2])
        if not (1 <= i <= v and 1 <= j <= v):
            raise StructureError(f"edge endpoint out of range: ({i}, {j})")
        adj[i - 1, j - 1] = 1
        wts[i - 1, j - 1] = w
    return ApplicationDag(adjacency=adj, edge_weights=wts, task_sizes=sizes,
                          priorities=prios)


def save_dag(dag: ApplicationDag, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(dag_to_dict(dag), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_dag(path: str) -> ApplicationDag:
    with open(path) as fh:
        return dag_from_dict(json.load(fh))
