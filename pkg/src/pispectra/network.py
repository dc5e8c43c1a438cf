"""State-space assembly for graphs of pi-section lines fed by ideal sources.

Each branch with ``N`` sections is a ladder of ``N`` standard pi-sections:
``N`` series (R, L) elements, ``N - 1`` internal nodes carrying ``C`` and
``G`` and half a section's shunt (``C/2``, ``G/2``) at each end bus.  Shunt
elements meeting at a bus are summed.  Source buses are ideal voltage
nodes: they have no state, and their shunt elements are absorbed.

A single branch between two source buses therefore reproduces the
single-line model with ``N - 1`` internal nodes, see
:func:`pispectra.line.build_open_loop`.

Source law (``i_out`` is the current the source injects into its branch)::

    v_src = w v_ref - kv v_meas - ki i_out,   w = kv if kv > 0 else 1
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .dynamics import SignalSpec, SimResult, simulate
from .line import (
    ConfigError,
    ControlGains,
    LineParams,
    StateSpaceModel,
    reference_weight,
    section_params,
)

__all__ = [
    "SCHEMA_VERSION",
    "Branch",
    "Source",
    "NetworkSpec",
    "AssembledModel",
    "assemble",
    "energize",
    "load_network",
    "wscc9_spec",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Branch:
    from_bus: str
    to_bus: str
    line: LineParams
    n_sections: int
    tag: str = ""  # tells parallel branches apart

    @property
    def name(self) -> str:
        base = f"{self.from_bus}-{self.to_bus}"
        return f"{base}#{self.tag}" if self.tag else base


@dataclass(frozen=True)
class Source:
    bus: str
    kv: float = 0.0
    ki: float = 0.0
    signal: SignalSpec | None = None

    def __post_init__(self):
        if self.kv < 0 or self.ki < 0:
            raise ConfigError(f"source gains at bus {self.bus} must be >= 0")


def _tag_parallel(branches) -> tuple:
    """Number repeated ``from-to`` names ``#2, #3, ...`` so every branch name is unique."""
    out, seen = [], {}
    for b in branches:
        count = seen.get(b.name, 0) + 1
        seen[b.name] = count
        if count > 1:
            b = replace(b, tag=str(count))
            seen[b.name] = 1
        out.append(b)
    return tuple(out)


@dataclass(frozen=True)
class NetworkSpec:
    buses: tuple
    branches: tuple
    sources: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(str(b) for b in self.buses))
        object.__setattr__(self, "branches", _tag_parallel(self.branches))
        object.__setattr__(self, "sources", tuple(self.sources))

    def with_gains(self, kv: float, ki: float) -> "NetworkSpec":
        """Same network with every source switched to the given gains."""
        srcs = tuple(Source(s.bus, kv, ki, s.signal) for s in self.sources)
        return NetworkSpec(self.buses, self.branches, srcs, self.name)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "buses": list(self.buses),
            "branches": [
                {
                    "from": b.from_bus,
                    "to": b.to_bus,
                    "r_per_km": b.line.r_per_km,
                    "l_per_km": b.line.l_per_km,
                    "c_per_km": b.line.c_per_km,
                    "g_per_km": b.line.g_per_km,
                    "length_km": b.line.length_km,
                    "n_sections": b.n_sections,
                    **({"tag": b.tag} if b.tag else {}),
                }
                for b in self.branches
            ],
            "sources": [
                {"bus": s.bus, "kv": s.kv, "ki": s.ki, "signal": s.signal.to_dict() if s.signal else None}
                for s in self.sources
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NetworkSpec":
        version = d.get("schema_version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported network schema version {version}")
        try:
            branches = tuple(
                Branch(
                    str(b["from"]),
                    str(b["to"]),
                    LineParams(float(b["r_per_km"]), float(b["l_per_km"]), float(b["c_per_km"]),
                               float(b.get("g_per_km", 0.0)), float(b["length_km"])),
                    int(b["n_sections"]),
                    str(b.get("tag", "")),
                )
                for b in d["branches"]
            )
            sources = tuple(
                Source(str(s["bus"]), float(s.get("kv", 0.0)), float(s.get("ki", 0.0)),
                       SignalSpec.from_dict(s["signal"]) if s.get("signal") else None)
                for s in d["sources"]
            )
            return cls(tuple(d["buses"]), branches, sources, d.get("name", ""))
        except KeyError as exc:
            raise ConfigError(f"network spec is missing key {exc.args[0]!r}") from None


def load_network(path) -> NetworkSpec:
    return NetworkSpec.from_dict(json.loads(Path(path).read_text()))


def wscc9_spec() -> NetworkSpec:
    """The shipped WSCC 9-bus topology (lines only, source at bus 1)."""
    text = resources.files("pispectra").joinpath("data/wscc9.json").read_text()
    return NetworkSpec.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class AssembledModel:
    model: StateSpaceModel
    spec: NetworkSpec
    bus_state: dict  # non-source bus -> state index
    branch_states: dict  # branch name -> inductor state indices, from-end first
    bus_output: np.ndarray = field(repr=False)  # (C, D) rows giving every bus voltage
    bus_feedthrough: np.ndarray = field(repr=False)

    def bus_voltages(self, result: SimResult) -> np.ndarray:
        """Voltage of every bus (``spec.buses`` order) along a simulation."""
        return result.x @ self.bus_output.T + result.u @ self.bus_feedthrough.T

    def branch_currents(self, result: SimResult, end: str = "from") -> np.ndarray:
        """Series current at the ``from`` (or ``to``) end of every branch."""
        pick = 0 if end == "from" else -1
        idx = [self.branch_states[b.name][pick] for b in self.spec.branches]
        return result.x[:, idx]

    def source_current(self, result: SimResult, source: int = 0) -> np.ndarray:
        """Current injected by a source into its (single) branch."""
        src = self.spec.sources[source]
        b = next(b for b in self.spec.branches if src.bus in (b.from_bus, b.to_bus))
        idx = self.branch_states[b.name]
        return result.x[:, idx[0]] if b.from_bus == src.bus else -result.x[:, idx[-1]]


def _validate(spec: NetworkSpec) -> None:
    if len(set(spec.buses)) != len(spec.buses):
        raise ConfigError("duplicate bus names")
    buses = set(spec.buses)
    names = [b.name for b in spec.branches]
    if len(set(names)) != len(names):
        raise ConfigError("duplicate branch names")
    for b in spec.branches:
        if b.from_bus not in buses or b.to_bus not in buses:
            raise ConfigError(f"branch {b.name} references an unknown bus")
        if b.from_bus == b.to_bus:
            raise ConfigError(f"branch {b.name} is a self-loop")
        if int(b.n_sections) != b.n_sections or b.n_sections < 1:
            raise ConfigError(f"branch {b.name} must have at least one section")
    if not spec.sources:
        raise ConfigError("network needs at least one source")
    src_buses = [s.bus for s in spec.sources]
    if len(set(src_buses)) != len(src_buses):
        raise ConfigError("at most one source per bus")
    for s in src_buses:
        if s not in buses:
            raise ConfigError(f"source at unknown bus {s!r}")
    adj = {b: set() for b in spec.buses}
    for br in spec.branches:
        adj[br.from_bus].add(br.to_bus)
        adj[br.to_bus].add(br.from_bus)
    seen, queue = {spec.buses[0]}, deque([spec.buses[0]])
    while queue:
        for nb in adj[queue.popleft()] - seen:
            seen.add(nb)
            queue.append(nb)
    if seen != buses:
        raise ConfigError(f"network is disconnected: unreachable buses {sorted(buses - seen)}")


def assemble(spec: NetworkSpec) -> AssembledModel:
    """Kirchhoff equations of the network as a dense state-space model."""
    _validate(spec)
    sources = {s.bus: (j, s) for j, s in enumerate(spec.sources)}
    n_in = len(spec.sources)

    # state numbering: per branch i_1, v_1, ..., i_N, then non-source buses
    labels, branch_states, branch_nodes = [], {}, {}
    for br in spec.branches:
        inductors, nodes = [], []
        for k in range(1, br.n_sections + 1):
            inductors.append(len(labels))
            labels.append(f"i[{br.name}:{k}]")
            if k < br.n_sections:
                nodes.append(len(labels))
                labels.append(f"v[{br.name}:{k}]")
        branch_states[br.name] = inductors
        branch_nodes[br.name] = nodes
    bus_state = {}
    for bus in spec.buses:
        if bus not in sources:
            bus_state[bus] = len(labels)
            labels.append(f"v[{bus}]")
    m = len(labels)

    # each node potential as (state coefficients, input coefficients)
    def node(br: Branch, pos: int):
        if 0 < pos < br.n_sections:
            return {branch_nodes[br.name][pos - 1]: 1.0}, {}
        bus = br.from_bus if pos == 0 else br.to_bus
        if bus in bus_state:
            return {bus_state[bus]: 1.0}, {}
        return source_potential(bus)

    def source_potential(bus):
        j, src = sources[bus]
        states, inputs = {}, {j: reference_weight(src.kv)}
        if src.kv > 0 or src.ki > 0:
            incident = [b for b in spec.branches if bus in (b.from_bus, b.to_bus)]
            if len(incident) != 1:
                raise ConfigError(f"gain-controlled source at bus {bus} needs exactly one incident branch")
            br = incident[0]
            at_from = br.from_bus == bus
            ind = branch_states[br.name][0 if at_from else -1]
            meas_pos = 1 if at_from else br.n_sections - 1
            if 0 < meas_pos < br.n_sections:
                meas = branch_nodes[br.name][meas_pos - 1]
            else:
                far = br.to_bus if at_from else br.from_bus
                if far not in bus_state:
                    raise ConfigError(f"source at bus {bus} measures another source bus")
                meas = bus_state[far]
            if src.kv > 0:
                states[meas] = -src.kv
            if src.ki > 0:
                # i_out = +i (source at from-end) or -i (source at to-end)
                states[ind] = states.get(ind, 0.0) + (-src.ki if at_from else src.ki)
        return states, inputs

    A = np.zeros((m, m))
    B = np.zeros((m, n_in))
    shunt_c = {bus: 0.0 for bus in bus_state}
    shunt_g = {bus: 0.0 for bus in bus_state}
    for br in spec.branches:
        sec = section_params(br.line, br.n_sections)
        inductors = branch_states[br.name]
        for k, row in enumerate(inductors):
            # L di/dt = v(node k) - v(node k+1) - R i, coefficients collected before dividing by L
            coef = {row: -sec.R}
            cin = {}
            for sign, (st, ins) in ((1.0, node(br, k)), (-1.0, node(br, k + 1))):
                for col, c in st.items():
                    coef[col] = coef.get(col, 0.0) + sign * c
                for col, c in ins.items():
                    cin[col] = cin.get(col, 0.0) + sign * c
            for col, c in coef.items():
                A[row, col] = c / sec.L
            for col, c in cin.items():
                B[row, col] = c / sec.L
        for k, row in enumerate(branch_nodes[br.name]):
            A[row, inductors[k]] = 1 / sec.C
            A[row, row] = -sec.G / sec.C
            A[row, inductors[k + 1]] = -1 / sec.C
        for bus in (br.from_bus, br.to_bus):
            if bus in bus_state:
                shunt_c[bus] += 0.5 * sec.C
                shunt_g[bus] += 0.5 * sec.G

    for bus, row in bus_state.items():
        c = shunt_c[bus]
        A[row, row] = -shunt_g[bus] / c
        for br in spec.branches:
            if br.to_bus == bus:
                A[row, branch_states[br.name][-1]] += 1 / c
            if br.from_bus == bus:
                A[row, branch_states[br.name][0]] -= 1 / c

    C_bus = np.zeros((len(spec.buses), m))
    D_bus = np.zeros((len(spec.buses), n_in))
    for r, bus in enumerate(spec.buses):
        if bus in bus_state:
            C_bus[r, bus_state[bus]] = 1.0
        else:
            st, ins = source_potential(bus)
            for col, c in st.items():
                C_bus[r, col] = c
            for col, c in ins.items():
                D_bus[r, col] = c

    gains = ControlGains()
    input_labels = [f"v_ref[{s.bus}]" for s in spec.sources]
    model = StateSpaceModel(A, B, labels, input_labels, None, None, gains)
    return AssembledModel(model, spec, bus_state, branch_states, C_bus, D_bus)


def energize(assembled: AssembledModel, t_end: float, dt: float, signals=None) -> SimResult:
    """Simulate the network with each source driven by its signal.

    ``signals`` overrides the per-source :class:`SignalSpec` stored in the
    network description (one entry per source, ``None`` for zero).
    """
    if signals is None:
        signals = [s.signal for s in assembled.spec.sources]
    return simulate(assembled.model, list(signals), t_end, dt)
