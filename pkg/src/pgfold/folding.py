"""Folding a circulant bipartite graph onto F = J/q physical units.

A fold plan time-multiplexes q logical units onto each physical unit.  The
reader side's offset pairs (taken two at a time from the sorted offset set)
become folded access patterns; executing every pattern for every fold covers
each edge exactly once while every physical memory unit serves exactly two
accesses per step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .circulant import CirculantBipartiteGraph, divisors

__all__ = [
    "FoldPlan",
    "FoldedPattern",
    "FoldedSequence",
    "BalanceReport",
    "pad_dummy_offset",
    "reader_offsets",
    "generate_folded_sequence",
    "verify_balance",
    "cross_fold_endpoints",
    "compute_rho",
]

PIPELINE_LEVELS = ("none", "writeback", "node", "graph")


@dataclass(frozen=True)
class FoldPlan:
    """Fold factor and design parameters for one synthesis run.

    design_option 1 runs all folds of a pattern before the next pattern;
    option 2 runs all patterns of a fold before the next fold (the order
    that admits graph-level pipelining).
    """

    q: int
    units_per_side: int
    design_option: int = 1
    T: int = 1
    delta: int = 1
    pipeline_level: str = "none"

    def __post_init__(self) -> None:
        if self.q < 1 or self.units_per_side < 1:
            raise ValueError("fold factor and unit count must be >= 1")
        if self.design_option not in (1, 2):
            raise ValueError("design option must be 1 or 2")
        if self.T < 1:
            raise ValueError("compute period T must be >= 1")
        if self.delta < 0:
            raise ValueError("interconnect latency must be >= 0")
        if self.pipeline_level not in PIPELINE_LEVELS:
            raise ValueError(
                f"pipeline level must be one of {PIPELINE_LEVELS}"
            )

    @property
    def order(self) -> int:
        return self.q * self.units_per_side

    @classmethod
    def for_graph(
        cls,
        graph: CirculantBipartiteGraph,
        q: int,
        design_option: int = 1,
        T: int = 1,
        delta: int = 1,
        pipeline_level: str = "none",
    ) -> "FoldPlan":
        if q < 1 or graph.order % q != 0:
            options = divisors(graph.order)
            raise ValueError(
                f"fold factor {q} does not divide the graph order {graph.order}; "
                f"valid factors are {options} (or expand the graph order first)"
            )
        return cls(
            q=q,
            units_per_side=graph.order // q,
            design_option=design_option,
            T=T,
            delta=delta,
            pipeline_level=pipeline_level,
        )


@dataclass(frozen=True)
class FoldedPattern:
    """One parallel access step: a pair of base offsets taken modulo F."""

    index: int
    offsets: tuple[int | None, int | None]
    folded: tuple[int | None, int | None]
    doubled: bool

    @property
    def has_dummy(self) -> bool:
        return self.offsets[1] is None


@dataclass(frozen=True)
class FoldedSequence:
    """Ordered folded patterns plus the slot order of one side's reads."""

    side: str
    order: int
    q: int
    units_per_side: int
    design_option: int
    patterns: tuple[FoldedPattern, ...]
    slots: tuple[tuple[int, int], ...]

    @property
    def pattern_count(self) -> int:
        return len(self.patterns)

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    def slot_index(self, l: int, k: int) -> int:
        if self.design_option == 1:
            return l * self.q + k
        return k * self.pattern_count + l

    def accesses(self, slot: int) -> list[dict]:
        """Per-unit accesses of one slot.

        Each entry: {"ppu", "lpu", "edges": (t0, t1), "pmus": (p0, p1)};
        the second pmu is None for the dummy half of a padded pattern.
        """
        l, k = self.slots[slot]
        pattern = self.patterns[l]
        f_units = self.units_per_side
        out = []
        for i in range(f_units):
            d0, d1 = pattern.folded
            p0 = (d0 + i) % f_units
            p1 = (d1 + i) % f_units if d1 is not None else None
            out.append(
                {
                    "ppu": i,
                    "lpu": k * f_units + i,
                    "edges": (2 * l, 2 * l + 1),
                    "pmus": (p0, p1),
                }
            )
        return out

    def to_json_dict(self) -> dict:
        return {
            "format_version": 1,
            "side": self.side,
            "J": self.order,
            "q": self.q,
            "F": self.units_per_side,
            "design_option": self.design_option,
            "patterns": [
                {
                    "index": p.index,
                    "offsets": list(p.offsets),
                    "folded": list(p.folded),
                    "doubled": p.doubled,
                }
                for p in self.patterns
            ],
            "slots": [list(s) for s in self.slots],
        }


def pad_dummy_offset(graph: CirculantBipartiteGraph) -> CirculantBipartiteGraph:
    """Append the scheduling sentinel when the degree is odd (no-op otherwise).

    The sentinel behaves as one extra edge per node scheduled as "no
    transaction", making the number of access patterns integral.
    """
    if graph.degree % 2 == 0 or graph.dummy_offset_padded:
        return graph
    return replace(graph, dummy_offset_padded=True)


def reader_offsets(graph: CirculantBipartiteGraph, side: str) -> tuple[int | None, ...]:
    """Sorted offsets a side's units read with; sentinel (None) stays last."""
    if side == "row":
        base = graph.base_offsets
    elif side == "col":
        base = graph.col_offsets()
    else:
        raise ValueError("side must be 'row' or 'col'")
    if graph.dummy_offset_padded:
        return tuple(base) + (None,)
    return tuple(base)


def generate_folded_sequence(
    graph: CirculantBipartiteGraph, plan: FoldPlan, side: str = "row"
) -> FoldedSequence:
    """Folded access patterns and the slot order for one side's reads.

    In slot (l, k), physical unit i serves logical unit k*F + i and reads
    physical memories (D[2l] + i) mod F and (D[2l+1] + i) mod F; the fold
    index never changes the folded endpoints, which is what lets the
    interconnect stay static.
    """
    if plan.order != graph.order:
        raise ValueError("fold plan was built for a different graph order")
    offsets = reader_offsets(graph, side)
    if len(offsets) % 2 != 0:
        raise ValueError(
            "degree must be even before folding; pad the dummy offset first"
        )
    f_units = plan.units_per_side
    patterns = []
    for l in range(len(offsets) // 2):
        d0, d1 = offsets[2 * l], offsets[2 * l + 1]
        f0 = d0 % f_units
        f1 = d1 % f_units if d1 is not None else None
        patterns.append(
            FoldedPattern(
                index=l,
                offsets=(d0, d1),
                folded=(f0, f1),
                doubled=f1 is not None and f0 == f1,
            )
        )
    pattern_count = len(patterns)
    if plan.design_option == 1:
        slots = tuple((l, k) for l in range(pattern_count) for k in range(plan.q))
    else:
        slots = tuple((l, k) for k in range(plan.q) for l in range(pattern_count))
    return FoldedSequence(
        side=side,
        order=graph.order,
        q=plan.q,
        units_per_side=f_units,
        design_option=plan.design_option,
        patterns=tuple(patterns),
        slots=slots,
    )


@dataclass(frozen=True)
class BalanceReport:
    """Outcome of the balance and coverage checks on a folded sequence."""

    ok: bool
    failures: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def verify_balance(
    sequence: FoldedSequence, graph: CirculantBipartiteGraph, plan: FoldPlan
) -> BalanceReport:
    """Check the two defining properties of a folded perfect access sequence.

    Per slot: serving units, first accesses, and second accesses each cover
    [0, F) exactly (dummy second accesses exempt), and every access lands on
    the folded image of the edge's true endpoint.  Across the sequence:
    every (node, edge) pair is read exactly once.
    """
    failures: list[str] = []
    f_units = plan.units_per_side
    full = set(range(f_units))
    offsets = reader_offsets(graph, sequence.side)
    seen: dict[tuple[int, int], int] = {}
    for slot in range(sequence.slot_count):
        l, k = sequence.slots[slot]
        entries = sequence.accesses(slot)
        for e in entries:
            for which in (0, 1):
                t = e["edges"][which]
                d = offsets[t] if t < len(offsets) else None
                pmu = e["pmus"][which]
                if d is None or pmu is None:
                    continue
                expected = ((e["lpu"] + d) % graph.order) % f_units
                if pmu != expected:
                    failures.append(
                        f"slot ({l},{k}): unit {e['ppu']} access {which} hits "
                        f"memory {pmu}, edge endpoint folds to {expected}"
                    )
        ppus = {e["ppu"] for e in entries}
        if ppus != full:
            failures.append(f"slot ({l},{k}): serving units cover {sorted(ppus)}")
        first = [e["pmus"][0] for e in entries]
        if set(first) != full or len(first) != f_units:
            failures.append(f"slot ({l},{k}): first accesses do not cover [0,{f_units})")
        second = [e["pmus"][1] for e in entries if e["pmus"][1] is not None]
        if second and (set(second) != full or len(second) != f_units):
            failures.append(f"slot ({l},{k}): second accesses do not cover [0,{f_units})")
        for e in entries:
            t0, t1 = e["edges"]
            seen[(e["lpu"], t0)] = seen.get((e["lpu"], t0), 0) + 1
            if e["pmus"][1] is not None:
                seen[(e["lpu"], t1)] = seen.get((e["lpu"], t1), 0) + 1
    degree = graph.degree
    for node in range(graph.order):
        for t in range(degree):
            count = seen.pop((node, t), 0)
            if count != 1:
                failures.append(f"edge (node {node}, index {t}) scheduled {count} times")
    extras = [key for key, count in seen.items() if count]
    if extras:
        failures.append(f"unexpected scheduled edges: {sorted(extras)[:4]}")
    return BalanceReport(ok=not failures, failures=tuple(failures))


def cross_fold_endpoints(
    graph: CirculantBipartiteGraph, plan: FoldPlan, side: str = "row"
) -> dict[tuple[int, int], int]:
    """Canonical folded endpoint per (serving unit, edge index).

    The folded endpoint of edge t at unit i is the same in every fold; this
    recomputes it per fold from absolute node labels and aborts on any
    disagreement (which would mean the folding arithmetic is broken, not a
    data problem).
    """
    offsets = [d for d in reader_offsets(graph, side) if d is not None]
    f_units = plan.units_per_side
    table: dict[tuple[int, int], int] = {}
    for i in range(f_units):
        for t, d in enumerate(offsets):
            endpoints = {
                ((k * f_units + i) + d) % graph.order % f_units
                for k in range(plan.q)
            }
            if len(endpoints) != 1:
                raise AssertionError(
                    f"folded endpoint of (unit {i}, edge {t}) varies across folds: "
                    f"{sorted(endpoints)}"
                )
            table[(i, t)] = endpoints.pop()
    return table


def compute_rho(
    graph: CirculantBipartiteGraph, plan: FoldPlan, side: str = "row"
) -> tuple[int, int, int]:
    """Switch sizing: distinct folded offsets rho, doubled patterns theta,
    and ports rho_hat = rho + theta for the given reader side."""
    offsets = reader_offsets(graph, side)
    f_units = plan.units_per_side
    rho = len({d % f_units for d in offsets if d is not None})
    theta = 0
    for l in range(len(offsets) // 2):
        d0, d1 = offsets[2 * l], offsets[2 * l + 1]
        if d0 is not None and d1 is not None and d0 % f_units == d1 % f_units:
            theta += 1
    return rho, theta, rho + theta
