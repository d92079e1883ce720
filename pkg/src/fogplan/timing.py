"""Service, network and DAG execution times for a given placement.

Task allocations are length-V integer vectors over node indices (0 = mobile,
1..Q = fog, Q+1 = cloud) with the root and sink pinned to the mobile device.
Resource vectors follow the layout documented in the platform module.

Division by an exhausted resource never raises: an infinite-time sentinel is
returned instead, so solvers can rank such placements as infinitely costly.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError
from .platform import MAX, PTS, SEQ, STS, Ecosystem

INF = float("inf")


# -- allocation helpers --------------------------------------------------------

def mobile_allocation(v: int) -> np.ndarray:
    return np.zeros(v, dtype=np.int64)


def fog_allocation(eco: Ecosystem, v: int) -> np.ndarray:
    x = np.full(v, eco.node_index("F1"), dtype=np.int64)
    x[0] = x[-1] = 0
    return x


def cloud_allocation(eco: Ecosystem, v: int) -> np.ndarray:
    x = np.full(v, eco.node_index("C"), dtype=np.int64)
    x[0] = x[-1] = 0
    return x


def allocation_from_names(eco: Ecosystem, names: list[str]) -> np.ndarray:
    return np.array([eco.node_index(n) for n in names], dtype=np.int64)


def allocation_names(eco: Ecosystem, x: np.ndarray) -> list[str]:
    return [eco.node_names[int(i)] for i in x]


def validate_allocation(eco: Ecosystem, x: np.ndarray, v: int) -> None:
    x = np.asarray(x)
    if x.shape != (v,):
        raise ParameterError(f"allocation must have length {v}")
    if x[0] != 0 or x[-1] != 0:
        raise ParameterError("first and last task must stay on the mobile")
    if (x < 0).any() or (x >= eco.q + 2).any():
        raise ParameterError("allocation component outside the node set")


def _nidx(eco: Ecosystem, node) -> int:
    return node if isinstance(node, (int, np.integer)) else eco.node_index(node)


def _rate(eco: Ecosystem, rs: np.ndarray, src: int, dst: int) -> float:
    """Throughput of the directed link src -> dst under resource vector rs."""
    names = eco.node_names
    if src == 0:
        return float(rs[eco.rs_index_up(names[dst])])
    if dst == 0:
        return float(rs[eco.rs_index_down(names[src])])
    return float(eco.backhaul_link(names[src], names[dst]).r)


def _pnorm(values: np.ndarray, r_exp: float) -> float:
    """Smooth upper bound of max(values): the r-norm of the vector."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    m = float(values.max())
    if m == 0.0 or not np.isfinite(m):
        return m
    return m * float((np.power(values / m, r_exp)).sum() ** (1.0 / r_exp))


# -- per-task / per-node times ---------------------------------------------------

def _wps_share_denominators(dag, eco: Ecosystem, x: np.ndarray) -> np.ndarray:
    """Total priority mass placed on each node."""
    denom = np.zeros(eco.q + 2)
    np.add.at(denom, np.asarray(x), dag.priorities)
    return denom


def task_service_time(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                      i: int, node) -> float:
    """Processing time of task i on its assigned node."""
    n = _nidx(eco, node)
    if int(x[i]) != n:
        raise ParameterError("task is not placed on the queried node")
    spec = eco.nodes[n]
    f = float(rs[n])
    if f <= 0.0:
        return INF
    if eco.service_discipline == SEQ:
        share = 1.0
    else:
        share = float(dag.priorities[i]) / float(
            _wps_share_denominators(dag, eco, x)[n])
    return float(dag.task_sizes[i]) / (share * spec.n * f)


def node_total_service_time(dag, eco: Ecosystem, x: np.ndarray,
                            rs: np.ndarray, node) -> float:
    """Busy time of a node: cumulative under SEQ, a max under sharing."""
    n = _nidx(eco, node)
    on_n = np.nonzero(np.asarray(x) == n)[0]
    if on_n.size == 0:
        return 0.0
    f = float(rs[n])
    if f <= 0.0:
        return INF
    spec = eco.nodes[n]
    sizes = dag.task_sizes[on_n]
    if eco.service_discipline == SEQ:
        return float(sizes.sum()) / (spec.n * f)
    phi_total = float(dag.priorities[on_n].sum())
    per_task = sizes * phi_total / dag.priorities[on_n]
    return float(per_task.max()) / (spec.n * f)


def input_volume(dag, eco: Ecosystem, x: np.ndarray, i: int, n1, n) -> float:
    """Data volume shipped from node n1 to feed task i on node n (bit),
    inflated by the link's average failure-induced retransmission overhead."""
    src = _nidx(eco, n1)
    dst = _nidx(eco, n)
    if src == dst:
        raise ParameterError("input_volume needs two distinct nodes")
    parents = dag.adjacency[:, i] * dag.edge_weights[:, i]
    raw = float(parents[np.asarray(x) == src].sum())
    names = eco.node_names
    return (1.0 + eco.link_nf(names[src], names[dst])) * raw


def task_network_time(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                      i: int) -> float:
    """Transport time of all inputs of task i to its assigned node."""
    dst = int(x[i])
    terms = []
    for src in range(eco.q + 2):
        if src == dst:
            continue
        vol = input_volume(dag, eco, x, i, src, dst)
        if vol == 0.0:
            continue
        rate = _rate(eco, rs, src, dst)
        if rate <= 0.0:
            return INF
        terms.append(vol / rate)
    if not terms:
        return 0.0
    return max(terms) if eco.network_time_mode == MAX else sum(terms)


def task_execution_time(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                        i: int) -> float:
    return (task_service_time(dag, eco, x, rs, i, int(x[i]))
            + task_network_time(dag, eco, x, rs, i))


def dag_execution_time(dag, eco: Ecosystem, x: np.ndarray,
                       rs: np.ndarray) -> float:
    """End-to-end DAG time: per-task execution times composed per the
    inter-node scheduling discipline (sum for STS, max for PTS)."""
    times = [task_execution_time(dag, eco, x, rs, i)
             for i in range(dag.task_count)]
    return max(times) if eco.scheduling_discipline == PTS else sum(times)


def smoothed_dag_time(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                      r_exp: float = 20.0) -> float:
    """DAG time with every max replaced by its r-norm upper bound.

    Coincides with dag_execution_time whenever no max is present (sum-type
    scheduling with sum-type network times); otherwise upper-bounds it, with
    the gap vanishing as r_exp grows.  This is the constraint surface the
    resource solver differentiates.
    """
    if r_exp < 1:
        raise ParameterError("smoothing exponent must be >= 1")
    v = dag.task_count
    exe = np.empty(v)
    for i in range(v):
        ser = task_service_time(dag, eco, x, rs, i, int(x[i]))
        dst = int(x[i])
        terms = []
        for src in range(eco.q + 2):
            if src == dst:
                continue
            vol = input_volume(dag, eco, x, i, src, dst)
            if vol == 0.0:
                continue
            rate = _rate(eco, rs, src, dst)
            if rate <= 0.0:
                terms = [INF]
                break
            terms.append(vol / rate)
        if not terms:
            net = 0.0
        elif eco.network_time_mode == MAX:
            net = _pnorm(np.array(terms), r_exp)
        else:
            net = sum(terms)
        exe[i] = ser + net
    if eco.scheduling_discipline == PTS:
        return _pnorm(exe, r_exp)
    return float(exe.sum())


# -- closed-form feasibility bounds ----------------------------------------------

def dag_time_upper_bound(dag, eco: Ecosystem) -> float:
    """Closed-form worst-case DAG time at maximal resources.

    Every task is charged the service time of the largest task on the
    weakest node at its minimum frequency share, plus the transport time of
    the heaviest per-task input over the slowest link; sum-type scheduling
    multiplies that by the task count.  Infinite when a required maximum
    resource is zero.
    """
    s_max = float(dag.task_sizes.max())
    w_in = dag.adjacency * dag.edge_weights
    w_in_max = float(w_in.sum(axis=0).max())

    if eco.service_discipline == SEQ:
        beta_min = 1.0
    else:
        beta_min = float(dag.priorities.min()) / float(dag.priorities.sum())

    cap_min = min(node.n * node.f_max for node in eco.nodes)
    t_ser = INF if cap_min <= 0.0 else s_max / (beta_min * cap_min)

    if w_in_max == 0.0:
        t_net = 0.0
    else:
        rates, nfs = [], []
        for n in eco.bhs_names:
            for pair in (("M", n), (n, "M")):
                rates.append(eco.wireless[pair].r_max)
                nfs.append(eco.wireless[pair].nf)
        for i, a in enumerate(eco.bhs_names):
            for b in eco.bhs_names[i + 1:]:
                link = eco.backhaul_link(a, b)
                rates.append(link.r)
                nfs.append(link.nf)
        r_min = min(rates)
        t_net = INF if r_min <= 0.0 else w_in_max * (1.0 + max(nfs)) / r_min

    t_exe_max = t_ser + t_net
    if eco.scheduling_discipline == STS:
        return dag.task_count * t_exe_max
    return t_exe_max


def jop_feasible_sufficient(dag, eco: Ecosystem) -> bool:
    """Closed-form sufficient test: the worst-case bound meets the deadline."""
    if eco.th_min == 0.0:
        return True
    return dag_time_upper_bound(dag, eco) <= 1.0 / eco.th_min
