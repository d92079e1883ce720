"""Mobile/fog/cloud execution platform description.

The platform is the node set {M, F1..FQ, C} plus the wireless access links
(mobile <-> fog over short range, mobile <-> cloud over cellular) and the
backhaul mesh between fog and cloud nodes.  Resource vectors collect, in a
fixed order, the per-node clone frequencies followed by the per-wireless-link
up/down throughputs; backhaul throughputs are derived constants and are not
optimization variables.

Units are fixed package-wide: bit, bit/s, second, Watt, Joule.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .errors import ConfigError, ParameterError, StructureError

SEQ, WPS = "SEQ", "WPS"
STS, PTS = "STS", "PTS"
SUM, MAX = "SUM", "MAX"


def omega_coefficients(rtt: float, eta: float, chi_tx: float, chi_rx: float,
                       length_m: float, alpha: float) -> tuple[float, float]:
    """Transmit/receive power coefficients of a wireless connection.

    Both coefficients follow rtt**eta * chi / (1 + length**alpha); the range
    term models fading-induced loss over the spanned distance.
    """
    if rtt <= 0:
        raise ParameterError("round-trip time must be positive")
    if not 2.0 < alpha <= 4.0:
        raise ParameterError("loss exponent must lie in (2, 4]")
    scale = rtt ** eta / (1.0 + length_m ** alpha)
    return chi_tx * scale, chi_rx * scale


def backhaul_throughput(mss: float, rtt: float, p_loss: float) -> float:
    """Steady-state TCP throughput of a backhaul connection (bit/s)."""
    if mss <= 0 or rtt <= 0:
        raise ParameterError("MSS and RTT must be positive")
    if p_loss <= 0 or p_loss > 1:
        raise ParameterError("segment loss probability must lie in (0, 1]")
    return 1.22 * mss / (rtt * np.sqrt(p_loss))


@dataclass(frozen=True)
class NodeSpec:
    """Compute node: a virtualized clone with n homogeneous cores."""

    name: str
    n: int                 # virtual cores
    f_max: float           # max per-core frequency (bit/s); 0 = access forbidden
    k: float               # dynamic power coefficient, Watt/(bit/s)**gamma
    gamma: float           # dynamic power exponent, >= 2 for convexity
    r: float               # fraction of dynamic power shared across cores
    nc: int                # containers hosted per physical server
    p_cpu_idle: float      # idle CPU power of the hosting server (Watt)
    p_net_idle: float      # idle NIC power (Watt)

    def __post_init__(self):
        if self.n < 1 or self.nc < 1:
            raise ParameterError("core and container counts must be >= 1")
        if self.gamma < 2:
            raise ParameterError("dynamic power exponent must be >= 2")
        if not 0.0 <= self.r <= 1.0:
            raise ParameterError("shared-power fraction must lie in [0, 1]")
        if self.f_max < 0:
            raise ParameterError("f_max must be non-negative")


@dataclass(frozen=True)
class WirelessLinkSpec:
    """One direction of a single-hop wireless connection touching the mobile."""

    src: str
    dst: str
    r_max: float           # max throughput (bit/s); 0 = link absent
    nf: float              # average connection failure rate (volume overhead)
    rtt: float
    eta: float
    chi_tx: float
    chi_rx: float
    length_m: float
    alpha: float
    xi_tx: float
    xi_rx: float
    technology: str = ""   # free-form label ("wifi", "cellular", ...)
    omega_tx: float = field(init=False)
    omega_rx: float = field(init=False)

    def __post_init__(self):
        if self.r_max < 0 or self.nf < 0:
            raise ParameterError("r_max and nf must be non-negative")
        if not self.xi_tx >= self.xi_rx >= 2.0:
            raise ParameterError("need xi_tx >= xi_rx >= 2")
        tx, rx = omega_coefficients(self.rtt, self.eta, self.chi_tx,
                                    self.chi_rx, self.length_m, self.alpha)
        object.__setattr__(self, "omega_tx", tx)
        object.__setattr__(self, "omega_rx", rx)


@dataclass(frozen=True)
class BackhaulLinkSpec:
    """Two-way symmetric connection between two backhaul nodes."""

    a: str
    b: str
    hops: int
    p_hop: float           # one-way per-hop power (Watt)
    mss: float             # TCP maximum segment size (bit)
    rtt: float
    p_loss: float
    nf: float = 0.0
    # Explicit throughput; overrides the derived TCP rate.  0 deletes the
    # link from the overlay.
    throughput_override: float | None = None
    r: float = field(init=False)

    def __post_init__(self):
        if self.hops < 1:
            raise ParameterError("hop count must be >= 1")
        if self.throughput_override is not None:
            if self.throughput_override < 0:
                raise ParameterError("throughput override must be >= 0")
            rate = float(self.throughput_override)
        else:
            rate = float(backhaul_throughput(self.mss, self.rtt, self.p_loss))
        object.__setattr__(self, "r", rate)


@dataclass(frozen=True)
class ServiceModel:
    """Binary switches selecting whose energy enters the objective."""

    theta_m: int = 1
    theta_f: int = 1
    theta_c: int = 1

    def __post_init__(self):
        for v in (self.theta_m, self.theta_f, self.theta_c):
            if v not in (0, 1):
                raise ParameterError("service-model switches must be 0 or 1")

    @classmethod
    def eco_centric(cls) -> "ServiceModel":
        return cls(1, 1, 1)

    @classmethod
    def mobile_centric(cls) -> "ServiceModel":
        return cls(1, 0, 0)

    def theta(self, node_name: str) -> int:
        if node_name == "M":
            return self.theta_m
        if node_name == "C":
            return self.theta_c
        return self.theta_f


def backhaul_dynamic_power(link: BackhaulLinkSpec, sm: ServiceModel) -> float:
    """Fixed dynamic power of a backhaul connection, priced if any backhaul
    provider meters it."""
    return link.hops * link.p_hop * max(sm.theta_c, sm.theta_f)


@dataclass(frozen=True)
class Ecosystem:
    """Full platform: nodes, links, service model and discipline selectors.

    Node order is fixed as [M, F1, ..., FQ, C]; the resource vector layout is
    the per-node frequencies in that order followed by (up, down) throughput
    pairs for each backhaul-segment node, fog nodes first, cloud last.
    """

    q: int
    nodes: tuple[NodeSpec, ...]
    wireless: dict[tuple[str, str], WirelessLinkSpec]
    backhaul: dict[tuple[str, str], BackhaulLinkSpec]
    service_model: ServiceModel
    service_discipline: str = SEQ
    scheduling_discipline: str = STS
    network_time_mode: str = SUM
    th_min: float = 1.0 / 0.3   # minimum app throughput (app/s)

    def __post_init__(self):
        if self.q < 1:
            raise ParameterError("need at least one fog node")
        if len(self.nodes) != self.q + 2:
            raise StructureError("node list must be [M, F1..FQ, C]")
        expected = self.node_names
        got = tuple(n.name for n in self.nodes)
        if got != expected:
            raise StructureError(f"node names must be {expected}, got {got}")
        if self.service_discipline not in (SEQ, WPS):
            raise ParameterError("service discipline must be SEQ or WPS")
        if self.scheduling_discipline not in (STS, PTS):
            raise ParameterError("scheduling discipline must be STS or PTS")
        if self.network_time_mode not in (SUM, MAX):
            raise ParameterError("network time mode must be SUM or MAX")
        if self.th_min < 0:
            raise ParameterError("minimum throughput must be >= 0")
        for name in self.bhs_names:
            for pair in ((
                    "M", name), (name, "M")):
                if pair not in self.wireless:
                    raise StructureError(f"missing wireless link {pair}")
        for i, a in enumerate(self.bhs_names):
            for b in self.bhs_names[i + 1:]:
                if (a, b) not in self.backhaul:
                    raise StructureError(f"missing backhaul link ({a}, {b})")

    # -- naming and indexing -------------------------------------------------

    @property
    def node_names(self) -> tuple[str, ...]:
        return ("M",) + tuple(f"F{i}" for i in range(1, self.q + 1)) + ("C",)

    @property
    def bhs_names(self) -> tuple[str, ...]:
        return self.node_names[1:]

    def node_index(self, name: str) -> int:
        try:
            return self.node_names.index(name)
        except ValueError:
            raise ConfigError(f"unknown node name: {name!r}") from None

    @property
    def rs_dim(self) -> int:
        return 3 * self.q + 4

    def rs_labels(self) -> list[str]:
        labels = [f"f_{n}" for n in self.node_names]
        for n in self.bhs_names:
            labels += [f"R_M->{n}", f"R_{n}->M"]
        return labels

    def rs_index_up(self, bhs_name: str) -> int:
        """Resource-vector index of the mobile-to-node throughput."""
        j = self.bhs_names.index(bhs_name)
        return (self.q + 2) + 2 * j

    def rs_index_down(self, bhs_name: str) -> int:
        return self.rs_index_up(bhs_name) + 1

    # -- link lookups ---------------------------------------------------------

    def backhaul_link(self, a: str, b: str) -> BackhaulLinkSpec:
        return self.backhaul.get((a, b)) or self.backhaul[(b, a)]

    def link_nf(self, src: str, dst: str) -> float:
        if src == "M" or dst == "M":
            return self.wireless[(src, dst)].nf
        return self.backhaul_link(src, dst).nf

    def fixed_rate(self, src: str, dst: str) -> float | None:
        """Throughput of a link that is not an optimization variable."""
        if src == "M" or dst == "M":
            return None
        return self.backhaul_link(src, dst).r

    # -- derived vectors -------------------------------------------------------

    def max_resource_vector(self) -> np.ndarray:
        rs = np.empty(self.rs_dim)
        for i, node in enumerate(self.nodes):
            rs[i] = node.f_max
        for n in self.bhs_names:
            rs[self.rs_index_up(n)] = self.wireless[("M", n)].r_max
            rs[self.rs_index_down(n)] = self.wireless[(n, "M")].r_max
        return rs

    # -- functional updates ----------------------------------------------------

    def with_service_model(self, sm: ServiceModel) -> "Ecosystem":
        return replace(self, service_model=sm)

    def with_tdag_max(self, tdag_max: float) -> "Ecosystem":
        if tdag_max <= 0:
            raise ParameterError("max DAG time must be positive")
        return replace(self, th_min=1.0 / tdag_max)

    def with_wireless_rmax(self, pairs_to_rmax: dict[tuple[str, str], float]
                           ) -> "Ecosystem":
        wireless = dict(self.wireless)
        for pair, r_max in pairs_to_rmax.items():
            if pair not in wireless:
                raise ConfigError(f"unknown wireless link {pair}")
            wireless[pair] = replace(wireless[pair], r_max=r_max)
        return replace(self, wireless=wireless)

    def wireless_pairs_by_technology(self, technology: str
                                     ) -> list[tuple[str, str]]:
        return [pair for pair, link in sorted(self.wireless.items())
                if link.technology == technology]


def max_resource_vector(eco: Ecosystem) -> np.ndarray:
    """Vector of maximal allowed resources, ordered like rs_labels()."""
    return eco.max_resource_vector()


# -- (de)serialization ---------------------------------------------------------

def ecosystem_to_dict(eco: Ecosystem) -> dict:
    return {
        "q": eco.q,
        "nodes": [{k: getattr(n, k) for k in (
            "name", "n", "f_max", "k", "gamma", "r", "nc",
            "p_cpu_idle", "p_net_idle")} for n in eco.nodes],
        "wireless": [{k: getattr(w, k) for k in (
            "src", "dst", "r_max", "nf", "rtt", "eta", "chi_tx", "chi_rx",
            "length_m", "alpha", "xi_tx", "xi_rx", "technology")}
            for _, w in sorted(eco.wireless.items())],
        "backhaul": [{k: getattr(b, k) for k in (
            "a", "b", "hops", "p_hop", "mss", "rtt", "p_loss", "nf",
            "throughput_override")} for _, b in sorted(eco.backhaul.items())],
        "service_model": {"theta_m": eco.service_model.theta_m,
                          "theta_f": eco.service_model.theta_f,
                          "theta_c": eco.service_model.theta_c},
        "service_discipline": eco.service_discipline,
        "scheduling_discipline": eco.scheduling_discipline,
        "network_time_mode": eco.network_time_mode,
        "th_min": eco.th_min,
    }


def ecosystem_from_dict(doc: dict) -> Ecosystem:
    try:
        nodes = tuple(NodeSpec(**rec) for rec in doc["nodes"])
        wireless = {(rec["src"], rec["dst"]): WirelessLinkSpec(**rec)
                    for rec in doc["wireless"]}
        backhaul = {(rec["a"], rec["b"]): BackhaulLinkSpec(**rec)
                    for rec in doc["backhaul"]}
        sm = ServiceModel(**doc["service_model"])
        return Ecosystem(
            q=doc["q"], nodes=nodes, wireless=wireless, backhaul=backhaul,
            service_model=sm,
            service_discipline=doc.get("service_discipline", SEQ),
            scheduling_discipline=doc.get("scheduling_discipline", STS),
            network_time_mode=doc.get("network_time_mode", SUM),
            th_min=doc.get("th_min", 1.0 / 0.3),
        )
    except (KeyError, TypeError) as exc:
        raise StructureError(f"malformed ecosystem document: {exc}") from exc


def save_ecosystem(eco: Ecosystem, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(ecosystem_to_dict(eco), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_ecosystem(path: str) -> Ecosystem:
    with open(path) as fh:
        return ecosystem_from_dict(json.load(fh))


def default_ecosystem(q: int = 1, tdag_max: float = 0.3,
                      service_model: ServiceModel | None = None,
                      service_discipline: str = SEQ,
                      scheduling_discipline: str = STS,
                      network_time_mode: str = SUM) -> Ecosystem:
    """Shipped default platform, read from the versioned defaults file.

    The defaults are artifact calibration, not measured hardware: magnitudes
    are chosen so the projected primal-dual iterations are well conditioned
    at the default step clipping, with the mobile frequency cap at 12 Mbit/s
    and the fog/cloud backhaul pinned at 3.70 Mbit/s.  For q > 1, every
    additional fog node reuses the F1 template.
    """
    text = resources.files("fogplan.data").joinpath(
        "default_ecosystem.json").read_text()
    doc = json.loads(text)
    node_doc = {rec["name"]: rec for rec in doc["nodes"]}
    wifi = doc["wifi_template"]
    cell = doc["cellular_template"]
    bh = doc["backhaul_template"]

    nodes = [NodeSpec(**node_doc["M"])]
    for i in range(1, q + 1):
        rec = dict(node_doc["F"])
        rec["name"] = f"F{i}"
        nodes.append(NodeSpec(**rec))
    nodes.append(NodeSpec(**node_doc["C"]))

    wireless: dict[tuple[str, str], WirelessLinkSpec] = {}
    for i in range(1, q + 1):
        name = f"F{i}"
        for src, dst, chi_key in (("M", name, "up"), (name, "M", "down")):
            rec = dict(wifi["common"])
            rec.update(wifi[chi_key])
            wireless[(src, dst)] = WirelessLinkSpec(src=src, dst=dst, **rec)
    for src, dst, chi_key in (("M", "C", "up"), ("C", "M", "down")):
        rec = dict(cell["common"])
        rec.update(cell[chi_key])
        wireless[(src, dst)] = WirelessLinkSpec(src=src, dst=dst, **rec)

    backhaul: dict[tuple[str, str], BackhaulLinkSpec] = {}
    bhs = [f"F{i}" for i in range(1, q + 1)] + ["C"]
    for i, a in enumerate(bhs):
        for b in bhs[i + 1:]:
            backhaul[(a, b)] = BackhaulLinkSpec(a=a, b=b, **bh)

    return Ecosystem(
        q=q, nodes=tuple(nodes), wireless=wireless, backhaul=backhaul,
        service_model=service_model or ServiceModel.eco_centric(),
        service_discipline=service_discipline,
        scheduling_discipline=scheduling_discipline,
        network_time_mode=network_time_mode,
        th_min=1.0 / tdag_max,
    )
