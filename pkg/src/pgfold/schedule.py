"""Concrete schedules for a folded plan.

Everything the hardware needs beyond the access patterns themselves: which
physical memories each unit pairs with, where every datum lives (bins and
addresses), when it is read, where and when results are written back,
switch port-selection tables, the static wire list, timing intervals for
every pipelining level, and the resource savings of overlaid folding.

Data placement follows one rule: a producer writes each result into its own
collocated memory at the address the consumer's read counter will have
reached when the consumer's schedule gets to that edge.  Reads are then a
bare counter; all placement intelligence sits on the write side.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circulant import CirculantBipartiteGraph
from .folding import (
    FoldPlan,
    FoldedSequence,
    generate_folded_sequence,
    reader_offsets,
)

__all__ = [
    "MemoryLayout",
    "WriteEntry",
    "WriteSchedule",
    "SwitchLUT",
    "Netlist",
    "TimingPlan",
    "INSTANCES",
    "other_side",
    "assign_memory_units",
    "layout_addresses",
    "read_cycle",
    "write_schedule",
    "edge_shift_replica",
    "switch_luts",
    "build_netlist",
    "full_timing",
    "resource_report",
]

INSTANCES = ("row_reads", "col_reads")


def other_side(side: str) -> str:
    if side == "row":
        return "col"
    if side == "col":
        return "row"
    raise ValueError("side must be 'row' or 'col'")


def reader_of(instance: str) -> str:
    """The side whose units read through this interconnect instance."""
    if instance not in INSTANCES:
        raise ValueError(f"unknown interconnect instance {instance!r}")
    return instance.split("_")[0]


# ---------------------------------------------------------------------------
# memory layout and addressing


@dataclass(frozen=True)
class MemoryLayout:
    """Bin structure of every physical memory unit.

    Option 1 keeps one bin per pattern (bin size 2q); option 2 one bin per
    fold (bin size 2B).  Either way address(l, k, b) = 2 * slot_index + b,
    so a read port only ever needs a counter.
    """

    design_option: int
    q: int
    pattern_count: int

    @property
    def bin_count(self) -> int:
        return self.pattern_count if self.design_option == 1 else self.q

    @property
    def bin_size(self) -> int:
        return 2 * self.q if self.design_option == 1 else 2 * self.pattern_count

    @property
    def capacity(self) -> int:
        return 2 * self.q * self.pattern_count

    def slot_index(self, l: int, k: int) -> int:
        if not (0 <= l < self.pattern_count and 0 <= k < self.q):
            raise ValueError(f"slot ({l},{k}) out of range")
        if self.design_option == 1:
            return l * self.q + k
        return k * self.pattern_count + l

    def address(self, l: int, k: int, b: int) -> int:
        if b not in (0, 1):
            raise ValueError("port must be 0 or 1")
        return 2 * self.slot_index(l, k) + b

    def reserved_addresses(self, degree: int) -> list[int]:
        """Cells never read because the sentinel pads an odd degree."""
        if degree % 2 == 0:
            return []
        return [self.address(self.pattern_count - 1, k, 1) for k in range(self.q)]

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "design_option": self.design_option,
            "q": self.q,
            "pattern_count": self.pattern_count,
            "bin_count": self.bin_count,
            "bin_size": self.bin_size,
            "capacity": self.capacity,
        }


def layout_addresses(plan: FoldPlan, graph: CirculantBipartiteGraph) -> MemoryLayout:
    """Memory layout for the plan; pattern count includes the sentinel pad."""
    return MemoryLayout(
        design_option=plan.design_option,
        q=plan.q,
        pattern_count=graph.scheduled_degree // 2,
    )


def assign_memory_units(
    graph: CirculantBipartiteGraph, plan: FoldPlan, side: str = "row"
) -> dict[tuple[int, int, int], tuple[int, int | None]]:
    """Physical memory pair serving unit i of fold k in pattern l.

    Because F divides the graph order, (D[2l] + k*F + i) mod F loses the
    fold term, which is exactly why the wiring can be static.
    """
    offsets = reader_offsets(graph, side)
    f_units = plan.units_per_side
    table: dict[tuple[int, int, int], tuple[int, int | None]] = {}
    for l in range(len(offsets) // 2):
        d0, d1 = offsets[2 * l], offsets[2 * l + 1]
        for k in range(plan.q):
            for i in range(f_units):
                p0 = (d0 + k * f_units + i) % f_units
                p1 = (d1 + k * f_units + i) % f_units if d1 is not None else None
                table[(k, i, l)] = (p0, p1)
    return table


def read_cycle(t: int, k: int, plan: FoldPlan, pattern_count: int) -> int:
    """Clock cycle (1-based count) by which edge t of fold k has been read.

    Option 1: (q * floor(t/2) + k + 1) * T.  Option 2: (B*k + ceil(t/2)) * T;
    for even t this counts to the start of the slot window rather than its
    end, which the tests document.
    """
    if not 0 <= t < 2 * pattern_count:
        raise ValueError(f"edge index {t} outside [0, {2 * pattern_count})")
    if not 0 <= k < plan.q:
        raise ValueError(f"fold index {k} outside [0, {plan.q})")
    if plan.design_option == 1:
        return (plan.q * (t // 2) + k + 1) * plan.T
    return (pattern_count * k + (t + 1) // 2) * plan.T


# ---------------------------------------------------------------------------
# write schedule


@dataclass(frozen=True)
class WriteEntry:
    """One write transaction: a producer's edge result into its collocated
    memory, addressed by the consumer's future read position."""

    producer: int
    edge: int
    slot: int
    pmu: int
    port: int
    address: int
    real: bool
    producer_real: bool
    consumer: int | None
    consumer_rank: int | None


@dataclass(frozen=True)
class WriteSchedule:
    producer_side: str
    design_option: int
    entries: tuple[WriteEntry, ...]

    def per_pmu(self) -> dict[int, list[WriteEntry]]:
        out: dict[int, list[WriteEntry]] = {}
        for entry in self.entries:
            out.setdefault(entry.pmu, []).append(entry)
        return out

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "producer_side": self.producer_side,
            "design_option": self.design_option,
            "entries": [
                {
                    "producer": e.producer,
                    "edge": e.edge,
                    "slot": e.slot,
                    "pmu": e.pmu,
                    "port": e.port,
                    "address": e.address,
                    "real": e.real,
                    "producer_real": e.producer_real,
                    "consumer": e.consumer,
                    "consumer_rank": e.consumer_rank,
                }
                for e in self.entries
            ],
        }


def consumer_rank(graph: CirculantBipartiteGraph, producer_side: str, t: int) -> int:
    """Rank of a producer's edge t in its consumer's sorted offset order."""
    prod = [d for d in reader_offsets(graph, producer_side) if d is not None]
    cons = [d for d in reader_offsets(graph, other_side(producer_side)) if d is not None]
    d = prod[t]
    return cons.index((-d) % graph.order)


def write_schedule(
    graph: CirculantBipartiteGraph, plan: FoldPlan, producer_side: str = "row"
) -> WriteSchedule:
    """All writes of one side's compute half, in producer slot order.

    Edge t of producer node h lands at the consumer-coordinate address
    (pattern, fold, port) = (rank//2, consumer//F, rank mod 2) where rank
    is the edge's position in the consumer's own sorted offset order.  The
    sentinel edge of a padded degree writes into the reserved cell of its
    producer's fold; dummy producer nodes stay idle (entries flagged).
    """
    j_nodes = graph.order
    f_units = plan.units_per_side
    layout = layout_addresses(plan, graph)
    pattern_count = layout.pattern_count
    sequence = generate_folded_sequence(graph, plan, producer_side)
    prod_offsets = reader_offsets(graph, producer_side)
    cons_offsets = [
        d for d in reader_offsets(graph, other_side(producer_side)) if d is not None
    ]
    rank_of = {d: idx for idx, d in enumerate(cons_offsets)}
    entries: list[WriteEntry] = []
    for slot in range(sequence.slot_count):
        l, k = sequence.slots[slot]
        for i in range(f_units):
            h = k * f_units + i
            producer_real = h < graph.real_order
            for which in (0, 1):
                t = 2 * l + which
                d = prod_offsets[t]
                if d is None:
                    entries.append(
                        WriteEntry(
                            producer=h,
                            edge=t,
                            slot=slot,
                            pmu=i,
                            port=which,
                            address=layout.address(pattern_count - 1, k, 1),
                            real=False,
                            producer_real=producer_real,
                            consumer=None,
                            consumer_rank=None,
                        )
                    )
                    continue
                c = (h + d) % j_nodes
                rank = rank_of[(-d) % j_nodes]
                address = layout.address(rank // 2, c // f_units, rank % 2)
                if producer_side == "row":
                    real = graph.is_real_edge(h, c)
                else:
                    real = graph.is_real_edge(c, h)
                entries.append(
                    WriteEntry(
                        producer=h,
                        edge=t,
                        slot=slot,
                        pmu=i,
                        port=which,
                        address=address,
                        real=real,
                        producer_real=producer_real,
                        consumer=c,
                        consumer_rank=rank,
                    )
                )
    return WriteSchedule(
        producer_side=producer_side,
        design_option=plan.design_option,
        entries=tuple(entries),
    )


def edge_shift_replica(
    graph: CirculantBipartiteGraph, base: int, t: int, target: int
) -> int:
    """Endpoint of the shift-replica of base node's t-th edge at target.

    The t-th edge of a row is taken in ascending order of absolute column
    labels; the replica at another row of the same side ends t-independent
    shift further along.
    """
    points = sorted(graph.incidence_row(base))
    if not 0 <= t < len(points):
        raise ValueError(f"edge index {t} outside [0, {len(points)})")
    return (points[t] + (target - base)) % graph.order


# ---------------------------------------------------------------------------
# switches and netlist


@dataclass(frozen=True)
class SwitchLUT:
    """Port selection table of one switch set.

    One row per pattern: the output (or input) port codes for the two
    accesses.  A dummy second access carries the invalid code, which
    tristates every output but the active one.  The table is identical for
    every switch of the set; a unit's position only shifts which wire a
    port reaches, not the code.
    """

    instance: str
    kind: str  # "pmu_out" (2-to-rho_hat) or "ppu_in" (rho_hat-to-2)
    rows: tuple[tuple[int, int], ...]
    port_count: int
    invalid_code: int
    stagger: int

    def to_rows(self) -> list[tuple[int, int, int]]:
        return [(l, a, b) for l, (a, b) in enumerate(self.rows)]


def _instance_ports(graph: CirculantBipartiteGraph, plan: FoldPlan, instance: str):
    """Distinct folded offsets, their port codes, and extra doubled ports."""
    side = reader_of(instance)
    offsets = reader_offsets(graph, side)
    f_units = plan.units_per_side
    deltas = sorted({d % f_units for d in offsets if d is not None})
    port_of = {delta: idx for idx, delta in enumerate(deltas)}
    rho = len(deltas)
    extra_ports = {}  # pattern index -> port code
    next_port = rho
    for l in range(len(offsets) // 2):
        d0, d1 = offsets[2 * l], offsets[2 * l + 1]
        if d0 is not None and d1 is not None and d0 % f_units == d1 % f_units:
            extra_ports[l] = next_port
            next_port += 1
    return offsets, deltas, port_of, extra_ports, next_port


def switch_luts(
    graph: CirculantBipartiteGraph, plan: FoldPlan
) -> dict[str, dict[str, SwitchLUT]]:
    """Port-selection tables for both interconnect instances.

    The memory-side and unit-side tables carry the same codes because wire
    j of a memory's switch lands on port j of the consumer's switch.  The
    unit-side set activates one cycle after the memory-side set.
    """
    out: dict[str, dict[str, SwitchLUT]] = {}
    for instance in INSTANCES:
        offsets, deltas, port_of, extra_ports, port_count = _instance_ports(
            graph, plan, instance
        )
        f_units = plan.units_per_side
        rows = []
        for l in range(len(offsets) // 2):
            d0, d1 = offsets[2 * l], offsets[2 * l + 1]
            j0 = port_of[d0 % f_units]
            if d1 is None:
                j1 = port_count  # invalid code: tristate
            elif l in extra_ports:
                j1 = extra_ports[l]
            else:
                j1 = port_of[d1 % f_units]
            rows.append((j0, j1))
        out[instance] = {
            "out": SwitchLUT(
                instance=instance,
                kind="pmu_out",
                rows=tuple(rows),
                port_count=port_count,
                invalid_code=port_count,
                stagger=0,
            ),
            "in": SwitchLUT(
                instance=instance,
                kind="ppu_in",
                rows=tuple(rows),
                port_count=port_count,
                invalid_code=port_count,
                stagger=1,
            ),
        }
    return out


@dataclass(frozen=True)
class Netlist:
    """Static component and wire inventory of the folded architecture."""

    units_per_side: int
    components: tuple[dict, ...]
    wires: tuple[dict, ...]
    local_channels: tuple[dict, ...]
    annotations: dict

    def wires_of(self, instance: str) -> list[dict]:
        return [w for w in self.wires if w["instance"] == instance]

    def wire_lookup(self) -> dict[tuple[str, int], dict]:
        """Map (source switch, source port) -> wire."""
        return {(w["src"][0], w["src"][1]): w for w in self.wires}

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "units_per_side": self.units_per_side,
            "components": list(self.components),
            "wires": list(self.wires),
            "local_channels": list(self.local_channels),
            "annotations": self.annotations,
        }


def build_netlist(graph: CirculantBipartiteGraph, plan: FoldPlan) -> Netlist:
    """Components and static wires for both sides and both interconnects.

    For each memory m of the producing side and each distinct folded offset
    delta of the reading side, one wire runs from memory m's output switch
    port j(delta) to the input switch of reading unit (m - delta) mod F,
    same port code.  Doubled patterns add a second wire between the same
    switch pair on their extra port.
    """
    f_units = plan.units_per_side
    components: list[dict] = []
    for side in ("row", "col"):
        for i in range(f_units):
            components.append({"id": f"{side}_ppu_{i}", "kind": "ppu", "side": side})
            components.append({"id": f"{side}_pmu_{i}", "kind": "pmu", "side": side})
    wires: list[dict] = []
    annotations: dict = {
        "q": plan.q,
        "design_option": plan.design_option,
        "T": plan.T,
        "delta": plan.delta,
        "register_replication": plan.q,
        "instances": {},
    }
    for instance in INSTANCES:
        reading = reader_of(instance)
        producing = other_side(reading)
        offsets, deltas, port_of, extra_ports, port_count = _instance_ports(
            graph, plan, instance
        )
        rho = len(deltas)
        theta = len(extra_ports)
        for m in range(f_units):
            components.append(
                {
                    "id": f"{instance}_out_{m}",
                    "kind": "switch_pmu_out",
                    "instance": instance,
                    "at": f"{producing}_pmu_{m}",
                    "ports": port_count,
                }
            )
            components.append(
                {
                    "id": f"{instance}_in_{m}",
                    "kind": "switch_ppu_in",
                    "instance": instance,
                    "at": f"{reading}_ppu_{m}",
                    "ports": port_count,
                }
            )
        for m in range(f_units):
            for delta in deltas:
                j = port_of[delta]
                wires.append(
                    {
                        "name": f"{instance}_w_{m}_{j}",
                        "instance": instance,
                        "src": [f"{instance}_out_{m}", j],
                        "dst": [f"{instance}_in_{(m - delta) % f_units}", j],
                        "folded_offset": delta,
                        "copy": 0,
                    }
                )
            for l, j in sorted(extra_ports.items()):
                delta = offsets[2 * l] % f_units
                wires.append(
                    {
                        "name": f"{instance}_w_{m}_{j}",
                        "instance": instance,
                        "src": [f"{instance}_out_{m}", j],
                        "dst": [f"{instance}_in_{(m - delta) % f_units}", j],
                        "folded_offset": delta,
                        "copy": 1,
                    }
                )
        annotations["instances"][instance] = {
            "rho": rho,
            "theta": theta,
            "rho_hat": port_count,
            "wire_count": f_units * port_count,
        }
    local_channels = [
        {"ppu": f"{side}_ppu_{i}", "pmu": f"{side}_pmu_{i}", "ports": 2}
        for side in ("row", "col")
        for i in range(f_units)
    ]
    return Netlist(
        units_per_side=f_units,
        components=tuple(components),
        wires=tuple(wires),
        local_channels=tuple(local_channels),
        annotations=annotations,
    )


# ---------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class TimingPlan:
    """Cycle-level plan of one iteration for a chosen pipelining level.

    half_length is the measured quantity the formulas predict: the span of
    the memory-access window (read side) for unpipelined levels, and the
    span up to the last write arrival for graph-level pipelining.
    side_span covers one side's complete activity; a full iteration is two
    sides back to back.
    """

    pipeline_level: str
    design_option: int
    T: int
    delta: int
    q: int
    pattern_count: int
    slots_per_half: int
    half_length: int
    side_span: int
    full_iteration: int
    read_cycles: tuple[int, ...]
    write_cycles: tuple[int, ...]
    intervals: tuple[tuple[str, int, int], ...]

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "pipeline_level": self.pipeline_level,
            "design_option": self.design_option,
            "T": self.T,
            "delta": self.delta,
            "q": self.q,
            "pattern_count": self.pattern_count,
            "slots_per_half": self.slots_per_half,
            "half_length": self.half_length,
            "side_span": self.side_span,
            "full_iteration": self.full_iteration,
            "read_cycles": list(self.read_cycles),
            "write_cycles": list(self.write_cycles),
            "intervals": [
                {"name": name, "start": start, "end": end}
                for name, start, end in self.intervals
            ],
        }


def full_timing(graph: CirculantBipartiteGraph, plan: FoldPlan) -> TimingPlan:
    """Slot-to-cycle mapping and interval table for the plan's pipeline level.

    none:      reads at the end of each T-cycle slot window, all writes in a
               separate writeback phase (one cycle per producer slot).
    writeback: each slot's writes land in the first cycle after its window.
    node:      one slot issued per cycle; results arrive T cycles later.
    graph:     option 2 only; reads delayed delta windows behind the
               producing stream and writes a further delta behind, giving
               the (B*q + 2*delta)*T half.
    """
    level = plan.pipeline_level
    if level == "graph" and plan.design_option != 2:
        raise ValueError(
            "graph-level pipelining requires design option 2; "
            "choose design option 2 or a different pipeline level"
        )
    pattern_count = graph.scheduled_degree // 2
    q, T, delta = plan.q, plan.T, plan.delta
    slots = pattern_count * q
    if level == "none":
        read_cycles = [(s + 1) * T - 1 for s in range(slots)]
        write_cycles = [slots * T + s for s in range(slots)]
        half_length = slots * T
        side_span = slots * T + slots
    elif level == "writeback":
        read_cycles = [(s + 1) * T - 1 for s in range(slots)]
        write_cycles = [(s + 1) * T for s in range(slots)]
        half_length = slots * T
        side_span = slots * T + 1
    elif level == "node":
        read_cycles = list(range(slots))
        write_cycles = [s + T for s in range(slots)]
        half_length = slots
        side_span = slots + T
    else:  # graph
        read_cycles = [(delta + s + 1) * T - 1 for s in range(slots)]
        write_cycles = [(2 * delta + s + 1) * T - 1 for s in range(slots)]
        half_length = (slots + 2 * delta) * T
        side_span = (slots + 2 * delta) * T
    intervals: list[tuple[str, int, int]] = []
    for side_index, side in enumerate(("row", "col")):
        base = side_index * side_span
        intervals.append((f"{side}_half", base, base + side_span))
        intervals.append(
            (f"{side}_read_window", base + read_cycles[0], base + read_cycles[-1] + 1)
        )
        intervals.append(
            (f"{side}_write_window", base + write_cycles[0], base + write_cycles[-1] + 1)
        )
        instance = f"{side}_reads"
        intervals.append(
            (
                f"{instance}_out_switch_enable",
                base + read_cycles[0],
                base + read_cycles[-1] + 1,
            )
        )
        intervals.append(
            (
                f"{instance}_in_switch_enable",
                base + read_cycles[0] + 1,
                base + read_cycles[-1] + 2,
            )
        )
    return TimingPlan(
        pipeline_level=level,
        design_option=plan.design_option,
        T=T,
        delta=delta,
        q=q,
        pattern_count=pattern_count,
        slots_per_half=slots,
        half_length=half_length,
        side_span=side_span,
        full_iteration=2 * side_span,
        read_cycles=tuple(read_cycles),
        write_cycles=tuple(write_cycles),
        intervals=tuple(intervals),
    )


def resource_report(graph: CirculantBipartiteGraph, plan: FoldPlan) -> dict:
    """Savings of overlaid folding versus per-fold multiplexing."""
    q = plan.q
    return {
        "format_version": 1,
        "fold_factor": q,
        "units_per_side": plan.units_per_side,
        "multiplexer_sets_avoided": q - 1,
        "wiring_factor_avoided": q,
        "fold_select_control_avoided": q > 1,
    }
