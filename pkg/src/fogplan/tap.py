"""Discrete task-placement search.

The outer problem assigns each task to a node; every candidate placement is
priced by the inner resource solve, and an elitist genetic search (plus five
benchmark strategies: fixed single/two-tier placements, a no-resource-scaling
variant, and exhaustive enumeration) minimizes the priced energy.  Placements
the resource problem rejects keep an infinite energy and simply sort last.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .energy import EnergyBreakdown, total_energy
from .errors import EnumerationCapError, ParameterError
from .platform import Ecosystem
from .rap import INF, RapConfig, RapResult, rap_feasible, solve_rap
from .timing import cloud_allocation, fog_allocation, mobile_allocation

PRESETS = ("FOG", "CLOUD", "MOBILE")


@dataclass
class GaParams:
    ps: int = 20            # population size
    cf: float = 0.5         # fraction of the population crossed over
    g_max: int = 10         # generations
    mn: int | None = None   # mutated positions; None -> round((V-2)/2)
    seed: int = 0
    pure_random_init: bool = False  # skip seeding the presets

    def __post_init__(self):
        if self.ps < 2:
            raise ParameterError("population size must be >= 2")
        if not 0.0 < self.cf <= 1.0:
            raise ParameterError("crossover fraction must lie in (0, 1]")
        if self.g_max < 0:
            raise ParameterError("generation count must be >= 0")

    @property
    def cross(self) -> int:
        """Number of individuals crossed over per generation (even)."""
        c = int(round(self.cf * self.ps))
        return c - 1 if c % 2 else c


@dataclass
class TapResult:
    x_best: np.ndarray
    rs_best: np.ndarray
    e_best: float
    best_trace: np.ndarray        # global best energy after init + each generation
    rap_calls: int
    breakdown: EnergyBreakdown | None = None


def random_allocation(v: int, eco: Ecosystem, rng: np.random.Generator
                      ) -> np.ndarray:
    """Placement with pinned endpoints and uniform interior components."""
    if v < 2:
        raise ParameterError("need at least two tasks")
    x = np.zeros(v, dtype=np.int64)
    if v > 2:
        x[1:-1] = rng.integers(0, eco.q + 2, size=v - 2)
    return x


def crossover(p1: np.ndarray, p2: np.ndarray, rng: np.random.Generator
              ) -> tuple[np.ndarray, np.ndarray]:
    """Single-point swap at a random cut in [2, V-1] (1-based)."""
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    if p1.shape != p2.shape:
        raise ParameterError("parents must have equal length")
    v = p1.shape[0]
    if v < 3:
        raise ParameterError("crossover needs an interior to swap")
    cut = int(rng.integers(2, v))  # keep at least one tail position
    c1 = np.concatenate([p1[:cut], p2[cut:]])
    c2 = np.concatenate([p2[:cut], p1[cut:]])
    return c1, c2


def mutate(x: np.ndarray, mn: int, eco: Ecosystem,
           rng: np.random.Generator) -> np.ndarray:
    """Rewrite mn interior positions (drawn with replacement) to random
    nodes; the pinned endpoints are never touched."""
    x = np.asarray(x)
    v = x.shape[0]
    if not 1 <= mn <= v - 2:
        raise ParameterError("mutation count must lie in [1, V-2]")
    out = x.copy()
    positions = rng.integers(1, v - 1, size=mn)
    values = rng.integers(0, eco.q + 2, size=mn)
    out[positions] = values
    return out


def fitness(dag, eco: Ecosystem, x: np.ndarray,
            rap_config: RapConfig | None = None) -> float:
    """Inverse priced energy; zero for placements the resource solve rejects."""
    res = solve_rap(dag, eco, x, _pricing_config(rap_config))
    e = res.energy.e_tot
    return 0.0 if not np.isfinite(e) else 1.0 / e


def preset_allocation(dag, eco: Ecosystem, preset: str) -> np.ndarray:
    v = dag.task_count
    key = preset.upper()
    if key == "FOG":
        return fog_allocation(eco, v)
    if key == "CLOUD":
        return cloud_allocation(eco, v)
    if key == "MOBILE":
        return mobile_allocation(v)
    raise ParameterError(f"unknown preset {preset!r}")


def _pricing_config(rap_config: RapConfig | None) -> RapConfig:
    cfg = rap_config or RapConfig()
    return replace(cfg, record_traces=False, warm_start=None)


@dataclass
class _Individual:
    x: np.ndarray
    e: float
    rs: np.ndarray

    @property
    def key(self):
        return (self.e, tuple(self.x.tolist()))


def _run_ga(dag, eco: Ecosystem, params: GaParams, price) -> TapResult:
    """Elitist GA shared by the adaptive strategy and its fixed-resource
    variant; `price` maps a placement to (energy, resource vector)."""
    v = dag.task_count
    if v < 3:
        raise ParameterError("the genetic search needs at least one "
                             "offloadable task")
    mn = params.mn if params.mn is not None else max(1, round((v - 2) / 2))
    if not 1 <= mn <= v - 2:
        raise ParameterError("mutation count must lie in [1, V-2]")
    rng = np.random.default_rng(params.seed)
    calls = 0

    pop_x: list[np.ndarray] = []
    if not params.pure_random_init:
        for preset in PRESETS[:params.ps]:
            pop_x.append(preset_allocation(dag, eco, preset))
    while len(pop_x) < params.ps:
        pop_x.append(random_allocation(v, eco, rng))

    pop: list[_Individual] = []
    for x in pop_x:
        e, rs = price(x)
        calls += 1
        pop.append(_Individual(x=x, e=e, rs=rs))
    pop.sort(key=lambda ind: ind.key)
    best = pop[0]
    trace = [best.e]

    cross = params.cross
    for _ in range(params.g_max):
        # All randomness is drawn before any pricing so results do not
        # depend on how the pricing calls are dispatched.
        children_x: list[np.ndarray] = []
        for j in range(cross // 2):
            c1, c2 = crossover(pop[2 * j].x, pop[2 * j + 1].x, rng)
            children_x += [c1, c2]
        mutants_x = [mutate(ind.x, mn, eco, rng) for ind in pop[cross:]]

        offspring: list[_Individual] = []
        for x in children_x + mutants_x:
            e, rs = price(x)
            calls += 1
            offspring.append(_Individual(x=x, e=e, rs=rs))

        candidates = pop[:cross] + offspring
        candidates.sort(key=lambda ind: ind.key)
        pop = candidates[:params.ps]
        if pop[0].key < best.key:
            best = pop[0]
        trace.append(best.e)

    breakdown = (total_energy(dag, eco, best.x, best.rs)
                 if np.isfinite(best.e) else EnergyBreakdown.infinite(eco))
    return TapResult(x_best=best.x, rs_best=best.rs, e_best=best.e,
                     best_trace=np.asarray(trace), rap_calls=calls,
                     breakdown=breakdown)


def solve_agtas(dag, eco: Ecosystem, params: GaParams | None = None,
                rap_config: RapConfig | None = None) -> TapResult:
    """Elitist genetic placement search with adaptive resource pricing."""
    params = params or GaParams()
    cfg = _pricing_config(rap_config)

    def price(x):
        res = solve_rap(dag, eco, x, cfg)
        return res.energy.e_tot, res.rs

    return _run_ga(dag, eco, params, price)


def solve_otas(dag, eco: Ecosystem, params: GaParams | None = None
               ) -> TapResult:
    """Same genetic search, but every candidate is charged the energy of
    running flat out at maximal resources; no resource solves happen."""
    params = params or GaParams()
    rs_max = eco.max_resource_vector()

    def price(x):
        if not rap_feasible(dag, eco, x):
            return INF, np.full(eco.rs_dim, INF)
        return total_energy(dag, eco, x, rs_max).e_tot, rs_max.copy()

    result = _run_ga(dag, eco, params, price)
    result.rap_calls = 0
    return result


def solve_fixed(dag, eco: Ecosystem, preset: str,
                rap_config: RapConfig | None = None) -> TapResult:
    """Price one of the fixed placements (all-fog, all-cloud, all-mobile)."""
    x = preset_allocation(dag, eco, preset)
    res = solve_rap(dag, eco, x, _pricing_config(rap_config))
    return TapResult(x_best=x, rs_best=res.rs, e_best=res.energy.e_tot,
                     best_trace=np.asarray([res.energy.e_tot]), rap_calls=1,
                     breakdown=res.energy)


def solve_aess(dag, eco: Ecosystem, rap_config: RapConfig | None = None,
               enumeration_cap: int = 200_000) -> TapResult:
    """Exhaustive placement enumeration; exact but exponential in V."""
    v = dag.task_count
    nn = eco.q + 2
    count = nn ** (v - 2)
    if count > enumeration_cap:
        raise EnumerationCapError(count, enumeration_cap)
    cfg = _pricing_config(rap_config)

    best: tuple | None = None
    best_res: RapResult | None = None
    best_x: np.ndarray | None = None
    for combo in itertools.product(range(nn), repeat=v - 2):
        x = np.zeros(v, dtype=np.int64)
        x[1:-1] = combo
        res = solve_rap(dag, eco, x, cfg)
        key = (res.energy.e_tot, tuple(x.tolist()))
        if best is None or key < best:
            best, best_res, best_x = key, res, x
    assert best_res is not None and best_x is not None
    return TapResult(x_best=best_x, rs_best=best_res.rs,
                     e_best=best_res.energy.e_tot,
                     best_trace=np.asarray([best_res.energy.e_tot]),
                     rap_calls=count, breakdown=best_res.energy)


def solve_strategy(dag, eco: Ecosystem, strategy: str,
                   params: GaParams | None = None,
                   rap_config: RapConfig | None = None,
                   enumeration_cap: int = 200_000) -> TapResult:
    """Dispatch by strategy name: agtas | otas | fog | cloud | mobile | ess."""
    key = strategy.lower()
    if key == "agtas":
        return solve_agtas(dag, eco, params, rap_config)
    if key == "otas":
        return solve_otas(dag, eco, params)
    if key in ("fog", "cloud", "mobile"):
        return solve_fixed(dag, eco, key.upper(), rap_config)
    if key == "ess":
        return solve_aess(dag, eco, rap_config, enumeration_cap)
    raise ParameterError(f"unknown strategy {strategy!r}")


__all__ = [
    "GaParams", "TapResult", "crossover", "fitness", "mutate",
    "preset_allocation", "random_allocation", "solve_aess", "solve_agtas",
    "solve_fixed", "solve_otas", "solve_strategy",
]
