"""Computing and networking energy of one DAG execution.

Every clone pays a static (idle) energy proportional to the DAG execution
time while it is turned on, plus a dynamic energy proportional to its busy
time at a frequency-dependent power.  Every directed connection pays an idle
NIC energy while it carries traffic plus a throughput-dependent transport
energy.  The objective weighs the computing terms and the per-endpoint
network terms with the service-model switches; the full un-gated per-node
and per-connection parts are always reported for analysis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .platform import (Ecosystem, ServiceModel, WirelessLinkSpec,
                       backhaul_dynamic_power)
from .timing import dag_execution_time, node_total_service_time

INF = float("inf")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Total energy and its reconciliation-grade decomposition.

    per_node maps node name to (static, dynamic) computing energy without
    service-model gating; per_connection maps a directed link to its
    (static, dynamic) network energy with the gating already applied, since
    the switches sit inside the link power models.  e_mobile is the
    gating-independent share attributable to the mobile device.
    """

    e_tot: float
    e_cmp: float
    e_net: float
    e_mobile: float
    t_dag: float
    per_node: dict[str, tuple[float, float]]
    per_connection: dict[tuple[str, str], tuple[float, float]]

    @staticmethod
    def infinite(eco: Ecosystem) -> "EnergyBreakdown":
        nodes = {n: (INF, INF) for n in eco.node_names}
        conns = {}
        for a in eco.node_names:
            for b in eco.node_names:
                if a != b:
                    conns[(a, b)] = (INF, INF)
        return EnergyBreakdown(INF, INF, INF, INF, INF, nodes, conns)

    def csv_header(self) -> list[str]:
        cols = ["e_tot", "e_cmp", "e_net", "e_mobile", "t_dag"]
        for n in sorted(self.per_node):
            cols += [f"node_{n}_static", f"node_{n}_dynamic"]
        for a, b in sorted(self.per_connection):
            cols += [f"link_{a}->{b}_static", f"link_{a}->{b}_dynamic"]
        return cols

    def csv_row(self) -> list[float]:
        row = [self.e_tot, self.e_cmp, self.e_net, self.e_mobile, self.t_dag]
        for n in sorted(self.per_node):
            row += list(self.per_node[n])
        for key in sorted(self.per_connection):
            row += list(self.per_connection[key])
        return row


def computing_energy(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                     t_dag: float, node) -> tuple[float, float]:
    """(static, dynamic) computing energy of one clone, un-gated.

    Static: the clone's share of the host's idle power over the whole DAG
    execution, charged only when at least one task runs here.  Dynamic:
    core power at the allocated frequency over the node's busy time.
    """
    n = node if isinstance(node, (int, np.integer)) else eco.node_index(node)
    spec = eco.nodes[n]
    on_node = int((np.asarray(x) == n).sum())
    if on_node == 0:
        return 0.0, 0.0
    static = (spec.p_cpu_idle / spec.nc) * t_dag
    t_ser = node_total_service_time(dag, eco, x, rs, n)
    f = float(rs[n])
    dynamic = spec.n * (1.0 - spec.r) * spec.k * f ** spec.gamma * t_ser
    return static, dynamic


def wireless_dynamic_power(link: WirelessLinkSpec, r: float,
                           sm: ServiceModel) -> float:
    """Throughput-dependent power of one wireless direction: a transmit term
    billed to the source plus a receive term billed to the destination."""
    if r < 0:
        raise ValueError("throughput must be non-negative")
    if r == 0.0:
        return 0.0
    return (sm.theta(link.src) * link.omega_tx * r ** link.xi_tx
            + sm.theta(link.dst) * link.omega_rx * r ** link.xi_rx)


def raw_connection_volume(dag, x: np.ndarray, n1: int, n2: int) -> float:
    """Crossing-edge data volume from node n1 to node n2, before overhead."""
    x = np.asarray(x)
    src_mask = (x == n1)[:, None]
    dst_mask = (x == n2)[None, :]
    return float((dag.adjacency * dag.edge_weights * src_mask * dst_mask).sum())


def connection_volume(dag, eco: Ecosystem, x: np.ndarray, n1, n2) -> float:
    """Total volume shipped n1 -> n2 including failure-induced overhead."""
    a = n1 if isinstance(n1, (int, np.integer)) else eco.node_index(n1)
    b = n2 if isinstance(n2, (int, np.integer)) else eco.node_index(n2)
    if a == b:
        raise ValueError("connection_volume needs two distinct nodes")
    names = eco.node_names
    nf = eco.link_nf(names[a], names[b])
    return (1.0 + nf) * raw_connection_volume(dag, x, a, b)


def _connection_active(dag, x: np.ndarray, n1: int, n2: int) -> bool:
    """A connection is turned on iff some DAG edge crosses it."""
    x = np.asarray(x)
    src_mask = (x == n1)[:, None]
    dst_mask = (x == n2)[None, :]
    return bool((dag.adjacency * src_mask * dst_mask).any())


def oneway_network_energy(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                          t_dag: float, n1, n2) -> tuple[float, float]:
    """(static, dynamic) energy of the directed connection n1 -> n2.

    Both parts carry the service-model gating of the underlying power
    models.  Traffic over a zero-throughput link yields an infinite dynamic
    part rather than an error.
    """
    a = n1 if isinstance(n1, (int, np.integer)) else eco.node_index(n1)
    b = n2 if isinstance(n2, (int, np.integer)) else eco.node_index(n2)
    names = eco.node_names
    sm = eco.service_model
    active = _connection_active(dag, x, a, b)
    p_idle = (sm.theta(names[a]) * eco.nodes[a].p_net_idle
              + sm.theta(names[b]) * eco.nodes[b].p_net_idle)
    static = p_idle * t_dag if active else 0.0

    vol = connection_volume(dag, eco, x, a, b)
    if vol == 0.0:
        return static, 0.0
    if a == 0 or b == 0:
        link = eco.wireless[(names[a], names[b])]
        rate = float(rs[eco.rs_index_up(names[b]) if a == 0
                        else eco.rs_index_down(names[a])])
        if rate <= 0.0:
            return static, INF
        dynamic = wireless_dynamic_power(link, rate, sm) * vol / rate
    else:
        bh = eco.backhaul_link(names[a], names[b])
        if bh.r <= 0.0:
            return static, INF
        dynamic = backhaul_dynamic_power(bh, sm) * vol / bh.r
    return static, dynamic


def _mobile_share(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                  t_dag: float) -> float:
    """Mobile-attributed network energy, independent of the service model:
    the mobile's transmit term on uplinks, its receive term on downlinks,
    and its NIC idle energy on every active link it touches."""
    names = eco.node_names
    p_net_m = eco.nodes[0].p_net_idle
    total = 0.0
    for n in eco.bhs_names:
        dst = eco.node_index(n)
        up = eco.wireless[("M", n)]
        down = eco.wireless[(n, "M")]
        if _connection_active(dag, x, 0, dst):
            total += p_net_m * t_dag
        if _connection_active(dag, x, dst, 0):
            total += p_net_m * t_dag
        vol_up = connection_volume(dag, eco, x, 0, dst)
        if vol_up > 0.0:
            r_up = float(rs[eco.rs_index_up(n)])
            total += INF if r_up <= 0.0 else \
                up.omega_tx * r_up ** (up.xi_tx - 1.0) * vol_up
        vol_dn = connection_volume(dag, eco, x, dst, 0)
        if vol_dn > 0.0:
            r_dn = float(rs[eco.rs_index_down(n)])
            total += INF if r_dn <= 0.0 else \
                down.omega_rx * r_dn ** (down.xi_rx - 1.0) * vol_dn
    return total


def total_energy(dag, eco: Ecosystem, x: np.ndarray,
                 rs: np.ndarray) -> EnergyBreakdown:
    """Full energy breakdown of executing the DAG under (x, rs).

    The reported Joule figures use the exact DAG execution time; smoothing
    only ever enters solver gradients.  An infeasible placement (infinite
    time) propagates infinite sentinels through every component.
    """
    t_dag = dag_execution_time(dag, eco, x, rs)
    if not np.isfinite(t_dag):
        return EnergyBreakdown.infinite(eco)

    sm = eco.service_model
    names = eco.node_names
    per_node: dict[str, tuple[float, float]] = {}
    e_cmp = 0.0
    for n, name in enumerate(names):
        sta, dyn = computing_energy(dag, eco, x, rs, t_dag, n)
        per_node[name] = (sta, dyn)
        e_cmp += sm.theta(name) * (sta + dyn)

    per_conn: dict[tuple[str, str], tuple[float, float]] = {}
    e_net = 0.0
    for a, na in enumerate(names):
        for b, nb in enumerate(names):
            if a == b:
                continue
            sta, dyn = oneway_network_energy(dag, eco, x, rs, t_dag, a, b)
            per_conn[(na, nb)] = (sta, dyn)
            e_net += sta + dyn

    e_mob = per_node["M"][0] + per_node["M"][1] + _mobile_share(
        dag, eco, x, rs, t_dag)
    return EnergyBreakdown(
        e_tot=e_cmp + e_net, e_cmp=e_cmp, e_net=e_net, e_mobile=e_mob,
        t_dag=t_dag, per_node=per_node, per_connection=per_conn)
