"""Resource allocation for a fixed task placement.

Given a placement x, the continuous problem is to pick per-node frequencies
and per-wireless-link throughputs minimizing the gated total energy subject
to the DAG-time deadline and per-resource caps.  With power exponents >= 2
the problem is convex, and is solved by projected primal-dual iterations
with the up/down-clipped adaptive step sizes: descent on the resources,
ascent on the single deadline multiplier.

All x-dependent constants (per-node busy coefficients, per-link volumes,
static power totals) are folded once into a compiled instance so that one
iteration costs a handful of scalar operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import EnergyBreakdown, total_energy
from .errors import ParameterError
from .platform import (MAX, PTS, SEQ, STS, SUM, Ecosystem,
                       backhaul_dynamic_power)
from .timing import dag_execution_time, validate_allocation

INF = float("inf")


@dataclass
class RapConfig:
    i_max: int = 600            # primal-dual iteration budget
    a_max: float = 1e-7         # step-size clipping factor
    r_exp: float = 20.0         # max-smoothing exponent
    floor_eps: float = 1e-3     # relative floor for actively used resources
    warm_start: tuple[np.ndarray, float] | None = None
    grad_tol: float = 0.0       # optional early exit on projected-gradient norm
    record_traces: bool = True
    feas_tol: float = 1e-6      # relative tolerance on the deadline at return

    def __post_init__(self):
        if self.i_max < 1:
            raise ParameterError("iteration budget must be >= 1")
        if self.a_max <= 0:
            raise ParameterError("step clipping factor must be positive")
        if self.floor_eps <= 0:
            raise ParameterError("resource floor must be positive")
        if self.r_exp < 1:
            raise ParameterError("smoothing exponent must be >= 1")


@dataclass
class RapResult:
    rs: np.ndarray
    energy: EnergyBreakdown
    lam: float
    feasible: bool
    traces: dict[str, np.ndarray] | None
    iterations: int


class _Compiled:
    """x-dependent constants of the Lagrangian, folded for fast evaluation."""

    def __init__(self, dag, eco: Ecosystem, x: np.ndarray, r_exp: float):
        self.dag, self.eco = dag, eco
        self.x = np.asarray(x, dtype=np.int64)
        self.r_exp = float(r_exp)
        self.th = eco.th_min
        sm = eco.service_model
        names = eco.node_names
        nn = eco.q + 2
        dim = eco.rs_dim
        v = dag.task_count
        self.dim = dim

        tasks_on = [np.nonzero(self.x == n)[0] for n in range(nn)]
        self.active_node = np.array([t.size > 0 for t in tasks_on])

        # Per-task service coefficient: T_i_ser = ser_coef[i] / f(x_i).
        phi = dag.priorities
        share = np.ones(v)
        if eco.service_discipline != SEQ:
            phi_on = np.zeros(nn)
            np.add.at(phi_on, self.x, phi)
            share = phi / phi_on[self.x]
        n_cores = np.array([spec.n for spec in eco.nodes], dtype=np.float64)
        self.ser_coef = dag.task_sizes / (share * n_cores[self.x])

        # Per-node coefficients: DAG-time (sum of the node's per-task terms)
        # and busy-time (sum under SEQ, max under processor sharing).
        self.tdag_f_coef = np.zeros(nn)
        np.add.at(self.tdag_f_coef, self.x, self.ser_coef)
        busy = np.zeros(nn)
        for n in range(nn):
            idx = tasks_on[n]
            if idx.size == 0:
                continue
            if eco.service_discipline == SEQ:
                busy[n] = dag.task_sizes[idx].sum() / n_cores[n]
            else:
                phi_total = phi[idx].sum()
                busy[n] = (dag.task_sizes[idx] * phi_total
                           / phi[idx]).max() / n_cores[n]
        # Dynamic computing energy: dyn_coef * f ** (gamma - 1).
        k = np.array([s.k for s in eco.nodes])
        rr = np.array([s.r for s in eco.nodes])
        self.gamma = np.array([s.gamma for s in eco.nodes])
        self.dyn_coef = n_cores * (1.0 - rr) * k * busy
        theta = np.array([sm.theta(nm) for nm in names], dtype=np.float64)
        self.obj_dyn_coef = theta * self.dyn_coef

        # Directed volumes and activation indicators.
        self.vol = np.zeros((nn, nn))
        act = np.zeros((nn, nn), dtype=bool)
        weighted = dag.adjacency * dag.edge_weights
        for a in range(nn):
            src = (self.x == a)
            if not src.any():
                continue
            for b in range(nn):
                if a == b:
                    continue
                dst = (self.x == b)
                if not dst.any():
                    continue
                raw = weighted[np.ix_(src, dst)].sum()
                crossing = dag.adjacency[np.ix_(src, dst)].any()
                act[a, b] = bool(crossing)
                self.vol[a, b] = (1.0 + eco.link_nf(names[a], names[b])) * raw

        # Gated static power total (computing + NIC idle on active links)
        # and its network-only part.
        p_cpu = np.array([s.p_cpu_idle / s.nc for s in eco.nodes])
        p_net = np.array([s.p_net_idle for s in eco.nodes])
        s_cmp = float((theta * p_cpu * self.active_node).sum())
        s_net = 0.0
        for a in range(nn):
            for b in range(nn):
                if a != b and act[a, b]:
                    s_net += theta[a] * p_net[a] + theta[b] * p_net[b]
        self.static_coef = s_cmp + s_net
        self.static_net_coef = s_net

        # Backhaul transport: rates are fixed constants, so both the time and
        # the dynamic energy they contribute are constants of the instance.
        self.bh_time = 0.0
        self.bh_dyn = 0.0
        for i, a in enumerate(eco.bhs_names):
            ia = eco.node_index(a)
            for b in eco.bhs_names[i + 1:]:
                ib = eco.node_index(b)
                link = eco.backhaul_link(a, b)
                p_dyn = backhaul_dynamic_power(link, sm)
                for u, w in ((ia, ib), (ib, ia)):
                    if self.vol[u, w] > 0.0:
                        if link.r <= 0.0:
                            self.bh_time = INF
                        else:
                            self.bh_time += self.vol[u, w] / link.r
                            self.bh_dyn += p_dyn * self.vol[u, w] / link.r

        # Wireless resource-vector entries.
        self.wl_idx: list[int] = []
        self.wl_vol: list[float] = []
        self.wl_e = []      # (c_tx, xi_tx, c_rx, xi_rx) energy coefficients
        for n in eco.bhs_names:
            dst = eco.node_index(n)
            for pair, l in ((("M", n), eco.rs_index_up(n)),
                            ((n, "M"), eco.rs_index_down(n))):
                link = eco.wireless[pair]
                a, b = eco.node_index(pair[0]), eco.node_index(pair[1])
                self.wl_idx.append(l)
                self.wl_vol.append(float(self.vol[a, b]))
                self.wl_e.append((sm.theta(pair[0]) * link.omega_tx,
                                  link.xi_tx,
                                  sm.theta(pair[1]) * link.omega_rx,
                                  link.xi_rx))

        # Active-resource mask over the resource vector.
        self.active = np.zeros(dim, dtype=bool)
        self.active[:nn] = self.active_node
        for pos, l in enumerate(self.wl_idx):
            self.active[l] = self.wl_vol[pos] > 0.0

        # Incidence arrays for the per-task (general) evaluation path.
        inc_task, inc_rs, inc_vol, inc_rate = [], [], [], []
        for i in range(v):
            b = int(self.x[i])
            parents = dag.adjacency[:, i] * dag.edge_weights[:, i]
            for a in range(nn):
                if a == b:
                    continue
                raw = parents[self.x == a].sum()
                if raw == 0.0:
                    continue
                volume = (1.0 + eco.link_nf(names[a], names[b])) * raw
                if a == 0:
                    l, fixed = eco.rs_index_up(names[b]), 0.0
                elif b == 0:
                    l, fixed = eco.rs_index_down(names[a]), 0.0
                else:
                    l, fixed = -1, eco.backhaul_link(names[a], names[b]).r
                inc_task.append(i)
                inc_rs.append(l)
                inc_vol.append(volume)
                inc_rate.append(fixed)
        self.inc_task = np.array(inc_task, dtype=np.int64)
        self.inc_rs = np.array(inc_rs, dtype=np.int64)
        self.inc_vol = np.array(inc_vol)
        self.inc_rate = np.array(inc_rate)

        self.fast = (eco.scheduling_discipline == STS
                     and eco.network_time_mode == SUM
                     and np.isfinite(self.bh_time))

    # -- evaluation ------------------------------------------------------------

    def _clamped(self, rs: np.ndarray, floor: np.ndarray,
                 diag: dict | None) -> np.ndarray:
        rs = np.asarray(rs, dtype=np.float64)
        low = self.active & (rs < floor)
        if low.any():
            if diag is not None:
                diag["clamped"] = True
            rs = np.where(low, floor, rs)
        return rs

    def floor_vector(self, floor_eps: float, rs_max: np.ndarray) -> np.ndarray:
        return np.where(self.active, floor_eps * rs_max, 0.0)

    def _per_task_times(self, rs: np.ndarray, smooth: bool
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-task execution times plus the raw incidence transport terms."""
        f_task = rs[self.x]
        ser = np.where(f_task > 0.0, self.ser_coef / np.where(
            f_task > 0.0, f_task, 1.0), INF)
        if self.inc_task.size:
            rates = np.where(self.inc_rs >= 0, rs[self.inc_rs], self.inc_rate)
            terms = np.where(rates > 0.0, self.inc_vol / np.where(
                rates > 0.0, rates, 1.0), INF)
        else:
            terms = np.zeros(0)
        net = np.zeros(self.dag.task_count)
        if self.inc_task.size:
            if self.eco.network_time_mode == MAX:
                for i in np.unique(self.inc_task):
                    sel = terms[self.inc_task == i]
                    net[i] = (_pnorm_np(sel, self.r_exp) if smooth
                              else float(sel.max()))
            else:
                np.add.at(net, self.inc_task, terms)
        return ser + net, ser, terms

    def t_dag_exact(self, rs: np.ndarray) -> float:
        exe, _, _ = self._per_task_times(
            np.asarray(rs, dtype=np.float64), smooth=False)
        if self.eco.scheduling_discipline == PTS:
            return float(exe.max())
        return float(exe.sum())

    def t_dag_smoothed(self, rs: np.ndarray) -> float:
        if self.fast:
            with np.errstate(divide="ignore"):
                freq_part = np.where(
                    self.tdag_f_coef > 0.0,
                    self.tdag_f_coef / np.where(rs[:len(self.tdag_f_coef)] > 0,
                                                rs[:len(self.tdag_f_coef)],
                                                np.nan),
                    0.0)
            if np.isnan(freq_part).any():
                return INF
            t = float(freq_part.sum()) + self.bh_time
            for pos, l in enumerate(self.wl_idx):
                volume = self.wl_vol[pos]
                if volume > 0.0:
                    if rs[l] <= 0.0:
                        return INF
                    t += volume / rs[l]
            return t
        exe, _, _ = self._per_task_times(rs, smooth=True)
        if self.eco.scheduling_discipline == PTS:
            return _pnorm_np(exe, self.r_exp)
        return float(exe.sum())

    def dyn_energy(self, rs: np.ndarray) -> tuple[float, float]:
        """(gated dynamic computing, gated dynamic wireless) energy."""
        f = rs[:len(self.obj_dyn_coef)]
        cmp_dyn = float((self.obj_dyn_coef
                         * np.power(f, self.gamma - 1.0)).sum())
        net_dyn = 0.0
        for pos, l in enumerate(self.wl_idx):
            volume = self.wl_vol[pos]
            if volume == 0.0:
                continue
            r = rs[l]
            if r <= 0.0:
                return INF, INF
            c_tx, xi_tx, c_rx, xi_rx = self.wl_e[pos]
            net_dyn += volume * (c_tx * r ** (xi_tx - 1.0)
                                 + c_rx * r ** (xi_rx - 1.0))
        return cmp_dyn, net_dyn + self.bh_dyn

    def energy_value(self, rs: np.ndarray, t: float) -> tuple[float, float]:
        """(E_tot, E_net) for a given DAG time (exact or smoothed)."""
        cmp_dyn, net_dyn = self.dyn_energy(rs)
        e_net = self.static_net_coef * t + net_dyn
        return self.static_coef * t + cmp_dyn + net_dyn, e_net

    def lagrangian(self, rs: np.ndarray, lam: float) -> float:
        t = self.t_dag_smoothed(rs)
        e_tot, _ = self.energy_value(rs, t)
        return e_tot + lam * (self.th * t - 1.0)

    def gradient(self, rs: np.ndarray, lam: float) -> np.ndarray:
        """Analytic partials of the smoothed Lagrangian w.r.t. (rs, lam)."""
        nn = len(self.obj_dyn_coef)
        grad = np.zeros(self.dim + 1)
        coef = self.static_coef + lam * self.th

        if self.fast:
            t = self.t_dag_smoothed(rs)
            for n in range(nn):
                if not self.active_node[n]:
                    continue
                f = rs[n]
                grad[n] = (-coef * self.tdag_f_coef[n] / (f * f)
                           + self.obj_dyn_coef[n] * (self.gamma[n] - 1.0)
                           * f ** (self.gamma[n] - 2.0))
            for pos, l in enumerate(self.wl_idx):
                volume = self.wl_vol[pos]
                if volume == 0.0:
                    continue
                r = rs[l]
                c_tx, xi_tx, c_rx, xi_rx = self.wl_e[pos]
                grad[l] = (-coef * volume / (r * r)
                           + volume * (c_tx * (xi_tx - 1.0)
                                       * r ** (xi_tx - 2.0)
                                       + c_rx * (xi_rx - 1.0)
                                       * r ** (xi_rx - 2.0)))
            grad[-1] = self.th * t - 1.0
            return grad

        # General path: per-task composition with smoothed maxima.
        exe, ser, terms = self._per_task_times(rs, smooth=True)
        if self.eco.scheduling_discipline == PTS:
            t = _pnorm_np(exe, self.r_exp)
            w_task = np.power(exe / t, self.r_exp - 1.0) if t > 0 else \
                np.zeros_like(exe)
        else:
            t = float(exe.sum())
            w_task = np.ones_like(exe)

        # Frequencies: d ser_i / d f = -ser_i / f on the task's node.
        f_task = rs[self.x]
        contrib = -w_task * ser / f_task
        np.add.at(grad[:nn], self.x, contrib)
        for n in range(nn):
            if not self.active_node[n]:
                grad[n] = 0.0
                continue
            grad[n] = coef * grad[n] + self.obj_dyn_coef[n] * (
                self.gamma[n] - 1.0) * rs[n] ** (self.gamma[n] - 2.0)

        # Wireless throughputs through the per-task transport terms.
        if self.inc_task.size:
            rates = np.where(self.inc_rs >= 0, rs[self.inc_rs], self.inc_rate)
            if self.eco.network_time_mode == MAX:
                inner = np.zeros_like(terms)
                net = exe - ser
                net_of_term = net[self.inc_task] - 0.0
                ok = net_of_term > 0
                inner[ok] = np.power(terms[ok] / net_of_term[ok],
                                     self.r_exp - 1.0)
            else:
                inner = np.ones_like(terms)
            d_terms = -w_task[self.inc_task] * inner * terms / rates
            for pos in range(self.inc_task.size):
                l = self.inc_rs[pos]
                if l >= 0:
                    grad[l] += coef * d_terms[pos]
        for pos, l in enumerate(self.wl_idx):
            volume = self.wl_vol[pos]
            if volume == 0.0:
                continue
            r = rs[l]
            c_tx, xi_tx, c_rx, xi_rx = self.wl_e[pos]
            grad[l] += volume * (c_tx * (xi_tx - 1.0) * r ** (xi_tx - 2.0)
                                 + c_rx * (xi_rx - 1.0) * r ** (xi_rx - 2.0))

        grad[-1] = self.th * t - 1.0
        return grad


def _pnorm_np(values: np.ndarray, r_exp: float) -> float:
    if values.size == 0:
        return 0.0
    m = float(values.max())
    if m == 0.0 or not np.isfinite(m):
        return m
    return m * float(np.power(values / m, r_exp).sum() ** (1.0 / r_exp))


# -- public operations ----------------------------------------------------------

def rap_feasible(dag, eco: Ecosystem, x: np.ndarray) -> bool:
    """Necessary and sufficient test: the deadline is reachable at maximal
    resources (which are then themselves a feasible point)."""
    validate_allocation(eco, x, dag.task_count)
    t = dag_execution_time(dag, eco, x, eco.max_resource_vector())
    if not np.isfinite(t):
        return False
    return eco.th_min * t - 1.0 <= 0.0


def lagrangian(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
               lam: float, r_exp: float = 20.0) -> float:
    """Gated energy plus the deadline term, on the smoothed time surface."""
    if lam < 0:
        raise ParameterError("multiplier must be non-negative")
    return _Compiled(dag, eco, x, r_exp).lagrangian(
        np.asarray(rs, dtype=np.float64), lam)


def lagrangian_gradient(dag, eco: Ecosystem, x: np.ndarray, rs: np.ndarray,
                        lam: float, r_exp: float = 20.0,
                        floor_eps: float = 1e-3,
                        diag: dict | None = None) -> np.ndarray:
    """Analytic gradient of the Lagrangian w.r.t. (rs, lam).

    Actively used resources below their floor are clamped for the evaluation
    (reported through ``diag``) instead of dividing toward infinity.
    """
    comp = _Compiled(dag, eco, x, r_exp)
    floor = comp.floor_vector(floor_eps, eco.max_resource_vector())
    rs_eval = comp._clamped(rs, floor, diag)
    grad = comp.gradient(rs_eval, lam)
    if np.isnan(grad).any():
        raise RuntimeError("NaN in RAP gradient; check power-model exponents")
    return grad


def finite_difference_gradient(dag, eco: Ecosystem, x: np.ndarray,
                               rs: np.ndarray, lam: float, h: float = 1e-4,
                               r_exp: float = 20.0) -> np.ndarray:
    """Central-difference gradient of the Lagrangian; test oracle for the
    analytic expressions, kept deliberately independent of them."""
    comp = _Compiled(dag, eco, x, r_exp)
    rs = np.asarray(rs, dtype=np.float64)
    rs_max = eco.max_resource_vector()
    grad = np.empty(comp.dim + 1)
    for l in range(comp.dim):
        scale = rs[l] if rs[l] > 0 else (rs_max[l] if rs_max[l] > 0 else 1.0)
        step = h * scale
        hi, lo = rs.copy(), rs.copy()
        hi[l] += step
        lo[l] -= step
        grad[l] = (comp.lagrangian(hi, lam)
                   - comp.lagrangian(lo, lam)) / (2.0 * step)
    step = h * max(lam, 1.0)
    grad[-1] = (comp.lagrangian(rs, lam + step)
                - comp.lagrangian(rs, lam - step)) / (2.0 * step)
    return grad


def step_sizes(m: int, rs: np.ndarray, lam: float, config: RapConfig,
               rs_max: np.ndarray) -> tuple[np.ndarray, float]:
    """Up/down-clipped adaptive step sizes for iteration m.

    Each primal step grows with the squared current value but is capped at
    a_max times the resource's maximum; the floor a_max forbids stalling.
    The dual step follows the same rule against the largest resource cap.
    """
    a = config.a_max
    rs = np.asarray(rs, dtype=np.float64)
    psi = np.maximum(a, np.minimum(a * np.asarray(rs_max), rs * rs))
    xi = max(a, min(a * float(np.max(rs_max)), lam * lam))
    return psi, xi


def _restore_feasibility(comp: _Compiled, rs: np.ndarray,
                         rs_max: np.ndarray, bound: float,
                         tol: float) -> np.ndarray:
    """Pull the point toward maximal resources until the deadline holds.

    The DAG time is non-increasing along the segment, so bisection on the
    blend factor finds the least perturbation restoring feasibility.
    """
    if comp.t_dag_exact(rs) <= bound * (1.0 + tol):
        return rs
    target = np.where(comp.active, rs_max, rs)
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        cand = rs + mid * (target - rs)
        if comp.t_dag_exact(cand) <= bound:
            hi = mid
        else:
            lo = mid
    return rs + hi * (target - rs)


def solve_rap(dag, eco: Ecosystem, x: np.ndarray,
              config: RapConfig | None = None) -> RapResult:
    """Projected primal-dual solve of the resource problem at fixed x.

    Infeasible placements return infinite sentinels rather than raising.
    Feasible solves run the full iteration budget (or exit early on a small
    projected gradient when configured), then nudge the final point onto the
    deadline surface if the finite budget left it marginally outside.
    """
    config = config or RapConfig()
    x = np.asarray(x, dtype=np.int64)
    validate_allocation(eco, x, dag.task_count)
    rs_max = eco.max_resource_vector()
    comp = _Compiled(dag, eco, x, config.r_exp)

    t_at_max = comp.t_dag_exact(rs_max)
    if not np.isfinite(t_at_max) or eco.th_min * t_at_max - 1.0 > 0.0:
        return RapResult(rs=np.full(eco.rs_dim, INF),
                         energy=EnergyBreakdown.infinite(eco),
                         lam=INF, feasible=False, traces=None, iterations=0)

    floor = comp.floor_vector(config.floor_eps, rs_max)

    if config.warm_start is not None:
        rs0, lam = config.warm_start
        rs = np.asarray(rs0, dtype=np.float64).copy()
        # A coordinate that just became active restarts from its cap (a
        # known-feasible value); carrying a near-zero warm value across an
        # environment change would blow the deadline term up.
        refresh = comp.active & (rs < floor)
        rs[refresh] = rs_max[refresh]
        rs = np.clip(rs, floor, rs_max)
        lam = max(0.0, float(lam))
    else:
        rs = np.where(comp.active, rs_max, 0.0)
        lam = 0.0
    rs[~comp.active] = 0.0

    record = config.record_traces
    tr_e = np.empty(config.i_max) if record else None
    tr_n = np.empty(config.i_max) if record else None
    tr_l = np.empty(config.i_max) if record else None

    iterations = 0
    if comp.fast:
        rs, lam, iterations = _iterate_fast(
            comp, rs, lam, floor, rs_max, config, tr_e, tr_n, tr_l)
    else:
        rs, lam, iterations = _iterate_general(
            comp, rs, lam, floor, rs_max, config, tr_e, tr_n, tr_l)

    if eco.th_min > 0.0:
        rs = _restore_feasibility(comp, rs, rs_max, 1.0 / eco.th_min,
                                  config.feas_tol)

    traces = None
    if record:
        traces = {"e_tot": tr_e[:iterations], "e_net": tr_n[:iterations],
                  "lam": tr_l[:iterations]}
    return RapResult(rs=rs, energy=total_energy(dag, eco, x, rs), lam=lam,
                     feasible=True, traces=traces, iterations=iterations)


def _iterate_fast(comp: _Compiled, rs, lam, floor, rs_max, config,
                  tr_e, tr_n, tr_l):
    """Scalar hot loop for sum-type scheduling with sum-type network times."""
    eco = comp.eco
    nn = eco.q + 2
    a = config.a_max
    th = comp.th
    s_coef = comp.static_coef
    record = config.record_traces
    grad_tol = config.grad_tol

    freqs = []
    for n in range(nn):
        if comp.active_node[n]:
            freqs.append((n, comp.tdag_f_coef[n],
                          comp.obj_dyn_coef[n] * (comp.gamma[n] - 1.0),
                          comp.gamma[n] - 2.0, float(floor[n]),
                          float(rs_max[n]), a * float(rs_max[n])))
    wifis = []
    for pos, l in enumerate(comp.wl_idx):
        volume = comp.wl_vol[pos]
        if volume > 0.0:
            c_tx, xi_tx, c_rx, xi_rx = comp.wl_e[pos]
            wifis.append((l, volume, c_tx * (xi_tx - 1.0), xi_tx - 2.0,
                          c_rx * (xi_rx - 1.0), xi_rx - 2.0,
                          float(floor[l]), float(rs_max[l]),
                          a * float(rs_max[l])))

    y = rs.tolist()
    bh_time = comp.bh_time
    cap_xi = a * float(np.max(rs_max))
    track_pg = grad_tol > 0.0
    m = 0
    for m in range(1, config.i_max + 1):
        coef = s_coef + lam * th
        t = bh_time
        for n, tc, _, _, _, _, _ in freqs:
            t += tc / y[n]
        for l, volume, _, _, _, _, _, _, _ in wifis:
            t += volume / y[l]
        if t != t:
            raise RuntimeError("NaN in RAP iteration; "
                               "check power-model exponents")
        g_lam = th * t - 1.0

        pg_sq = 0.0
        new_vals = []
        for n, tc, ec, gexp, lo, hi, cap in freqs:
            f = y[n]
            g = -coef * tc / (f * f) + (ec if gexp == 0.0
                                        else ec * f ** gexp)
            ff = f * f
            psi = (cap if cap > a else a) if ff > cap else \
                (a if a > ff else ff)
            nv = f - psi * g
            nv = lo if nv < lo else (hi if nv > hi else nv)
            if track_pg and not ((f >= hi and g < 0.0)
                                 or (f <= lo and g > 0.0)):
                pg_sq += g * g
            new_vals.append((n, nv))
        for l, volume, atx, etx, arx, erx, lo, hi, cap in wifis:
            r = y[l]
            g = -coef * volume / (r * r) + volume * (
                (atx if etx == 0.0 else atx * r ** etx)
                + (arx if erx == 0.0 else arx * r ** erx))
            rr2 = r * r
            psi = (cap if cap > a else a) if rr2 > cap else \
                (a if a > rr2 else rr2)
            nv = r - psi * g
            nv = lo if nv < lo else (hi if nv > hi else nv)
            if track_pg and not ((r >= hi and g < 0.0)
                                 or (r <= lo and g > 0.0)):
                pg_sq += g * g
            new_vals.append((l, nv))
        for idx, nv in new_vals:
            y[idx] = nv
        lam2 = lam * lam
        xi = (cap_xi if cap_xi > a else a) if lam2 > cap_xi else (
            a if a > lam2 else lam2)
        lam = lam + xi * g_lam
        if lam < 0.0:
            lam = 0.0
        elif track_pg:
            pg_sq += g_lam * g_lam

        if record:
            t_new = bh_time
            for n, tc, _, _, _, _, _ in freqs:
                t_new += tc / y[n]
            for l, volume, _, _, _, _, _, _, _ in wifis:
                t_new += volume / y[l]
            arr = np.asarray(y)
            e_tot, e_net = comp.energy_value(arr, t_new)
            tr_e[m - 1] = e_tot
            tr_n[m - 1] = e_net
            tr_l[m - 1] = lam
        if grad_tol > 0.0 and math.sqrt(pg_sq) < grad_tol:
            break
    return np.asarray(y), lam, m


def _iterate_general(comp: _Compiled, rs, lam, floor, rs_max, config,
                     tr_e, tr_n, tr_l):
    """Vectorized loop covering parallel scheduling and max-type network
    times through the smoothed surfaces."""
    record = config.record_traces
    m = 0
    for m in range(1, config.i_max + 1):
        grad = comp.gradient(rs, lam)
        if np.isnan(grad).any():
            raise RuntimeError("NaN in RAP gradient; "
                               "check power-model exponents")
        psi, xi = step_sizes(m, rs, lam, config, rs_max)
        pg = grad[:-1].copy()
        pg[(rs >= rs_max) & (pg < 0.0)] = 0.0
        pg[(rs <= floor) & (pg > 0.0)] = 0.0
        rs = np.clip(rs - psi * grad[:-1], floor, rs_max)
        rs[~comp.active] = 0.0
        lam_new = lam + xi * grad[-1]
        g_lam = grad[-1] if (lam_new >= 0.0) else 0.0
        lam = max(0.0, lam_new)
        if record:
            t = comp.t_dag_smoothed(rs)
            e_tot, e_net = comp.energy_value(rs, t)
            tr_e[m - 1] = e_tot
            tr_n[m - 1] = e_net
            tr_l[m - 1] = lam
        if config.grad_tol > 0.0 and math.hypot(
                float(np.linalg.norm(pg)), g_lam) < config.grad_tol:
            break
    return rs, lam, m
