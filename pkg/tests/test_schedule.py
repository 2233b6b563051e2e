"""Memory layout, write scheduling, switch tables, netlist, and timing.

Golden values for the 15-node running example (offsets 0,1,2,4,5,8,10
folded by q=3 onto 5 units) were derived by hand from the placement rule
and frozen here before the implementation existed.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgfold.circulant import CirculantBipartiteGraph, expand_circulant
from pgfold.folding import (
    FoldPlan,
    compute_rho,
    generate_folded_sequence,
    pad_dummy_offset,
    reader_offsets,
)
from pgfold.schedule import (
    MemoryLayout,
    assign_memory_units,
    build_netlist,
    consumer_rank,
    edge_shift_replica,
    full_timing,
    layout_addresses,
    other_side,
    read_cycle,
    resource_report,
    switch_luts,
    write_schedule,
)

OFFSETS_15 = (0, 1, 2, 4, 5, 8, 10)


def running_example(q=3, design_option=1, **kwargs):
    graph = pad_dummy_offset(CirculantBipartiteGraph.plain(15, OFFSETS_15))
    plan = FoldPlan.for_graph(graph, q, design_option=design_option, **kwargs)
    return graph, plan


class TestMemoryLayout:
    def test_running_example_capacity(self):
        graph, plan = running_example()
        layout = layout_addresses(plan, graph)
        assert layout.pattern_count == 4
        assert layout.bin_count == 4
        assert layout.bin_size == 6
        assert layout.capacity == 24

    def test_option2_same_capacity_transposed_bins(self):
        graph, plan = running_example(design_option=2)
        layout = layout_addresses(plan, graph)
        assert layout.bin_count == 3
        assert layout.bin_size == 8
        assert layout.capacity == 24

    def test_address_goldens_option1(self):
        graph, plan = running_example()
        layout = layout_addresses(plan, graph)
        assert layout.address(0, 0, 0) == 0
        assert layout.address(0, 0, 1) == 1
        assert layout.address(1, 1, 1) == 9
        assert layout.address(3, 2, 1) == 23

    def test_address_is_two_slot_plus_port_both_options(self):
        for option in (1, 2):
            graph, plan = running_example(design_option=option)
            layout = layout_addresses(plan, graph)
            seen = set()
            for l in range(layout.pattern_count):
                for k in range(layout.q):
                    for b in (0, 1):
                        addr = layout.address(l, k, b)
                        assert addr == 2 * layout.slot_index(l, k) + b
                        seen.add(addr)
            assert seen == set(range(layout.capacity))

    def test_reserved_cells(self):
        graph, plan = running_example()
        layout = layout_addresses(plan, graph)
        assert layout.reserved_addresses(graph.scheduled_degree - 1) == [19, 21, 23]
        graph2, plan2 = running_example(design_option=2)
        layout2 = layout_addresses(plan2, graph2)
        assert layout2.reserved_addresses(7) == [7, 15, 23]
        assert layout.reserved_addresses(8) == []

    def test_address_validation(self):
        graph, plan = running_example()
        layout = layout_addresses(plan, graph)
        with pytest.raises(ValueError):
            layout.address(4, 0, 0)
        with pytest.raises(ValueError):
            layout.address(0, 3, 0)
        with pytest.raises(ValueError):
            layout.address(0, 0, 2)


class TestAssignMemoryUnits:
    def test_goldens(self):
        graph, plan = running_example()
        table = assign_memory_units(graph, plan, "row")
        assert table[(0, 0, 1)] == (2, 4)
        assert table[(2, 3, 0)] == (3, 4)
        assert table[(0, 0, 0)] == (0, 1)

    def test_fold_invariance(self):
        graph, plan = running_example()
        table = assign_memory_units(graph, plan, "row")
        for (k, i, l), pair in table.items():
            assert table[(0, i, l)] == pair

    def test_matches_sequence_accesses(self):
        for side in ("row", "col"):
            graph, plan = running_example()
            table = assign_memory_units(graph, plan, side)
            sequence = generate_folded_sequence(graph, plan, side)
            for slot in range(sequence.slot_count):
                l, k = sequence.slots[slot]
                for access in sequence.accesses(slot):
                    assert table[(k, access["ppu"], l)] == access["pmus"]

    def test_sentinel_second_member(self):
        graph, plan = running_example()
        table = assign_memory_units(graph, plan, "row")
        for k in range(3):
            for i in range(5):
                p0, p1 = table[(k, i, 3)]
                assert p0 == (10 + i) % 5
                assert p1 is None


class TestReadCycle:
    def test_option1_golden(self):
        graph, plan = running_example(T=1)
        assert read_cycle(5, 0, plan, 4) == 7
        graph, plan = running_example(T=12)
        assert read_cycle(5, 0, plan, 4) == 84

    def test_option1_full_window_structure(self):
        graph, plan = running_example(T=2)
        for t in range(8):
            for k in range(3):
                assert read_cycle(t, k, plan, 4) == (3 * (t // 2) + k + 1) * 2

    def test_option2_formula_and_even_edge_quirk(self):
        graph, plan = running_example(design_option=2, T=1)
        assert read_cycle(5, 0, plan, 4) == 3
        assert read_cycle(7, 2, plan, 4) == 12
        # For an even edge index the count reaches only the start of its
        # slot window (slot index k*B + t/2), one window early.
        assert read_cycle(4, 0, plan, 4) == 2
        sequence = generate_folded_sequence(graph, plan, "row")
        assert sequence.slot_index(2, 0) == 2

    def test_domain_errors(self):
        graph, plan = running_example()
        with pytest.raises(ValueError):
            read_cycle(8, 0, plan, 4)
        with pytest.raises(ValueError):
            read_cycle(0, 3, plan, 4)


class TestWriteSchedule:
    def test_address_goldens(self):
        graph, plan = running_example()
        schedule = write_schedule(graph, plan, "row")
        by_key = {(e.producer, e.edge): e for e in schedule.entries}
        assert by_key[(0, 0)].address == 0
        assert by_key[(5, 6)].address == 1
        assert by_key[(0, 4)].address == 9

    def test_consumer_coordinates_of_goldens(self):
        graph, plan = running_example()
        schedule = write_schedule(graph, plan, "row")
        by_key = {(e.producer, e.edge): e for e in schedule.entries}
        entry = by_key[(0, 4)]
        assert entry.consumer == 5
        assert entry.consumer_rank == 3
        assert by_key[(5, 6)].consumer == 0
        assert by_key[(5, 6)].consumer_rank == 1

    def test_port_is_edge_parity(self):
        graph, plan = running_example()
        schedule = write_schedule(graph, plan, "row")
        for entry in schedule.entries:
            assert entry.port == entry.edge % 2

    def test_collocated_writes(self):
        graph, plan = running_example()
        for side in ("row", "col"):
            schedule = write_schedule(graph, plan, side)
            for entry in schedule.entries:
                assert entry.pmu == entry.producer % plan.units_per_side

    def test_census(self):
        graph, plan = running_example()
        schedule = write_schedule(graph, plan, "row")
        assert len(schedule.entries) == 15 * 8
        assert sum(1 for e in schedule.entries if e.real) == 15 * 7
        assert all(e.producer_real for e in schedule.entries)

    def test_per_pmu_bijective_addressing(self):
        for option in (1, 2):
            for side in ("row", "col"):
                graph, plan = running_example(design_option=option)
                layout = layout_addresses(plan, graph)
                reserved = set(layout.reserved_addresses(graph.degree))
                schedule = write_schedule(graph, plan, side)
                for pmu, entries in schedule.per_pmu().items():
                    real_addrs = [e.address for e in entries if e.consumer is not None]
                    dummy_addrs = [e.address for e in entries if e.consumer is None]
                    assert sorted(real_addrs) == sorted(
                        set(range(layout.capacity)) - reserved
                    )
                    assert set(dummy_addrs) <= reserved
                    assert len(dummy_addrs) == len(reserved)

    def test_sentinel_entries_flagged(self):
        graph, plan = running_example()
        schedule = write_schedule(graph, plan, "row")
        sentinels = [e for e in schedule.entries if e.edge == 7]
        assert len(sentinels) == 15
        for e in sentinels:
            assert not e.real
            assert e.consumer is None
            assert e.port == 1
            assert e.address in (19, 21, 23)

    def test_slot_grouping(self):
        graph, plan = running_example()
        schedule = write_schedule(graph, plan, "row")
        sequence = generate_folded_sequence(graph, plan, "row")
        for slot in range(sequence.slot_count):
            group = [e for e in schedule.entries if e.slot == slot]
            assert len(group) == 2 * plan.units_per_side
            per_pmu = {}
            for e in group:
                per_pmu.setdefault(e.pmu, set()).add(e.port)
            assert all(ports == {0, 1} for ports in per_pmu.values())

    def test_write_lands_where_consumer_reads(self):
        for option in (1, 2):
            graph, plan = running_example(design_option=option)
            layout = layout_addresses(plan, graph)
            for side in ("row", "col"):
                schedule = write_schedule(graph, plan, side)
                cons = [
                    d
                    for d in reader_offsets(graph, other_side(side))
                    if d is not None
                ]
                for e in schedule.entries:
                    if e.consumer is None:
                        continue
                    rank = e.consumer_rank
                    # The consumer's read pairs its unit with exactly the
                    # producer's collocated memory...
                    read_pmu = (cons[rank] + e.consumer) % plan.units_per_side
                    assert read_pmu == e.pmu
                    # ...at the address its forward counter has reached.
                    assert e.address == layout.address(
                        rank // 2, e.consumer // plan.units_per_side, rank % 2
                    )

    def test_full_fold_addresses_descend_cyclically(self):
        graph = pad_dummy_offset(CirculantBipartiteGraph.plain(15, OFFSETS_15))
        plan = FoldPlan.for_graph(graph, 1)
        schedule = write_schedule(graph, plan, "row")
        for pmu, entries in schedule.per_pmu().items():
            addrs = [e.address for e in entries if e.consumer is not None]
            assert addrs == [0, 6, 5, 4, 3, 2, 1]
            for prev, cur in zip(addrs, addrs[1:]):
                assert (prev - cur) % 7 == 1

    def test_expanded_graph_flags(self):
        base = CirculantBipartiteGraph.plain(13, (0, 1, 3, 9))
        graph = pad_dummy_offset(expand_circulant(base, 1))
        plan = FoldPlan.for_graph(graph, 2)
        schedule = write_schedule(graph, plan, "row")
        assert len(schedule.entries) == 14 * 8
        assert sum(1 for e in schedule.entries if e.real) == 13 * 4
        dummy_node = [e for e in schedule.entries if e.producer == 13]
        assert dummy_node and all(not e.producer_real for e in dummy_node)
        assert all(not e.real for e in dummy_node)


class TestConsumerRank:
    def test_spot_values(self):
        graph, plan = running_example()
        assert consumer_rank(graph, "row", 0) == 0
        assert consumer_rank(graph, "row", 6) == 1
        assert consumer_rank(graph, "row", 4) == 3

    def test_reciprocal(self):
        graph, _ = running_example()
        row = [d for d in reader_offsets(graph, "row") if d is not None]
        for t in range(len(row)):
            back = consumer_rank(graph, "col", consumer_rank(graph, "row", t))
            assert back == t


class TestEdgeShiftReplica:
    def test_goldens(self):
        graph, _ = running_example()
        assert edge_shift_replica(graph, 1, 3, 1) == 5
        assert edge_shift_replica(graph, 1, 3, 12) == 1
        assert edge_shift_replica(graph, 12, 3, 12) == 7

    def test_identity_is_sorted_row(self):
        graph, _ = running_example()
        for base in range(15):
            row = sorted(graph.incidence_row(base))
            for t in range(7):
                assert edge_shift_replica(graph, base, t, base) == row[t]

    def test_domain(self):
        graph, _ = running_example()
        with pytest.raises(ValueError):
            edge_shift_replica(graph, 0, 7, 0)


class TestSwitchLuts:
    def test_row_instance_rows(self):
        graph, plan = running_example()
        luts = switch_luts(graph, plan)
        out = luts["row_reads"]["out"]
        assert out.rows == ((0, 1), (2, 4), (0, 3), (0, 5))
        assert out.port_count == 5
        assert out.invalid_code == 5
        assert out.kind == "pmu_out"

    def test_col_instance_rows_with_doubled_pattern(self):
        graph, plan = running_example()
        luts = switch_luts(graph, plan)
        out = luts["col_reads"]["out"]
        assert out.rows == ((0, 5), (2, 0), (1, 3), (4, 6))
        assert out.port_count == 6
        assert out.invalid_code == 6

    def test_in_table_mirrors_out_table(self):
        graph, plan = running_example()
        for instance, pair in switch_luts(graph, plan).items():
            assert pair["in"].rows == pair["out"].rows
            assert pair["in"].port_count == pair["out"].port_count
            assert pair["out"].stagger == 0
            assert pair["in"].stagger == 1
            assert pair["in"].kind == "ppu_in"

    def test_port_counts_match_rho(self):
        graph, plan = running_example()
        luts = switch_luts(graph, plan)
        for side in ("row", "col"):
            rho, theta, rho_hat = compute_rho(graph, plan, side)
            assert luts[f"{side}_reads"]["out"].port_count == rho_hat

    def test_doubled_toy(self):
        graph = CirculantBipartiteGraph.plain(8, (0, 4))
        plan = FoldPlan.for_graph(graph, 2)
        luts = switch_luts(graph, plan)
        for instance in ("row_reads", "col_reads"):
            out = luts[instance]["out"]
            assert out.rows == ((0, 1),)
            assert out.port_count == 2

    def test_to_rows(self):
        graph, plan = running_example()
        rows = switch_luts(graph, plan)["row_reads"]["out"].to_rows()
        assert rows[0] == (0, 0, 1)
        assert rows[3] == (3, 0, 5)


class TestNetlist:
    def test_component_census(self):
        graph, plan = running_example()
        net = build_netlist(graph, plan)
        kinds = {}
        for c in net.components:
            kinds[c["kind"]] = kinds.get(c["kind"], 0) + 1
        assert kinds == {
            "ppu": 10,
            "pmu": 10,
            "switch_pmu_out": 10,
            "switch_ppu_in": 10,
        }
        ids = {c["id"] for c in net.components}
        assert "row_ppu_0" in ids
        assert "col_pmu_4" in ids
        assert "row_reads_out_0" in ids
        assert "col_reads_in_3" in ids

    def test_switch_placement(self):
        graph, plan = running_example()
        net = build_netlist(graph, plan)
        by_id = {c["id"]: c for c in net.components}
        # Row units read column memories, so the memory-side switches of
        # the row_reads instance sit at column memories.
        assert by_id["row_reads_out_2"]["at"] == "col_pmu_2"
        assert by_id["row_reads_in_2"]["at"] == "row_ppu_2"
        assert by_id["col_reads_out_1"]["at"] == "row_pmu_1"

    def test_wire_counts(self):
        graph, plan = running_example()
        net = build_netlist(graph, plan)
        assert len(net.wires_of("row_reads")) == 25
        assert len(net.wires_of("col_reads")) == 30
        assert len(net.wires) == 55
        ann = net.annotations["instances"]
        assert ann["row_reads"] == {
            "rho": 5,
            "theta": 0,
            "rho_hat": 5,
            "wire_count": 25,
        }
        assert ann["col_reads"] == {
            "rho": 5,
            "theta": 1,
            "rho_hat": 6,
            "wire_count": 30,
        }

    def test_wires_are_circulant_rotations(self):
        graph, plan = running_example()
        net = build_netlist(graph, plan)
        f_units = plan.units_per_side
        for wire in net.wires:
            src_sw, src_port = wire["src"]
            dst_sw, dst_port = wire["dst"]
            assert dst_port == src_port
            m = int(src_sw.rsplit("_", 1)[1])
            d = int(dst_sw.rsplit("_", 1)[1])
            assert d == (m - wire["folded_offset"]) % f_units

    def test_each_in_switch_port_fed_once(self):
        graph, plan = running_example()
        net = build_netlist(graph, plan)
        seen = {}
        for wire in net.wires:
            key = tuple(wire["dst"])
            assert key not in seen
            seen[key] = wire
        for instance in ("row_reads", "col_reads"):
            ports = net.annotations["instances"][instance]["rho_hat"]
            count = sum(1 for k in seen if k[0].startswith(f"{instance}_in_"))
            assert count == plan.units_per_side * ports

    def test_local_channels(self):
        graph, plan = running_example()
        net = build_netlist(graph, plan)
        assert len(net.local_channels) == 10
        assert {"ppu": "row_ppu_0", "pmu": "row_pmu_0", "ports": 2} in net.local_channels

    def test_annotations_and_lookup(self):
        graph, plan = running_example()
        net = build_netlist(graph, plan)
        assert net.annotations["q"] == 3
        assert net.annotations["register_replication"] == 3
        wire = net.wire_lookup()[("row_reads_out_0", 0)]
        assert wire["dst"] == ["row_reads_in_0", 0]

    def test_json_round_shape(self):
        graph, plan = running_example()
        data = build_netlist(graph, plan).to_json_dict()
        assert data["format_version"] == 1
        assert data["units_per_side"] == 5
        assert len(data["wires"]) == 55


class TestTiming:
    def test_unpipelined(self):
        graph, plan = running_example(T=2)
        timing = full_timing(graph, plan)
        assert timing.slots_per_half == 12
        assert timing.half_length == 24
        assert timing.side_span == 36
        assert timing.full_iteration == 72
        assert timing.read_cycles[0] == 1
        assert timing.read_cycles[-1] == 23
        assert list(timing.write_cycles) == list(range(24, 36))

    def test_writeback_overlap(self):
        graph, plan = running_example(T=2, pipeline_level="writeback")
        timing = full_timing(graph, plan)
        assert timing.half_length == 24
        assert timing.side_span == 25
        assert list(timing.write_cycles) == [2 * (s + 1) for s in range(12)]

    def test_node_level(self):
        graph, plan = running_example(T=4, pipeline_level="node")
        timing = full_timing(graph, plan)
        assert timing.half_length == 12
        assert timing.side_span == 16
        assert list(timing.read_cycles) == list(range(12))
        assert list(timing.write_cycles) == list(range(4, 16))

    def test_graph_level_requires_option2(self):
        graph, plan = running_example(design_option=1, pipeline_level="graph")
        with pytest.raises(ValueError, match="design option 2"):
            full_timing(graph, plan)

    def test_graph_level_example(self):
        graph, plan = running_example(
            design_option=2, T=2, delta=1, pipeline_level="graph"
        )
        timing = full_timing(graph, plan)
        assert timing.half_length == 28
        assert timing.side_span == 28
        assert timing.full_iteration == 56

    def test_graph_level_golden_degree10(self):
        graph = CirculantBipartiteGraph.plain(21, tuple(range(10)))
        plan = FoldPlan.for_graph(
            graph, 7, design_option=2, T=1, delta=2, pipeline_level="graph"
        )
        timing = full_timing(graph, plan)
        assert timing.slots_per_half == 35
        assert timing.half_length == 39

    def test_half_length_ratio_is_fold_factor(self):
        graph = pad_dummy_offset(CirculantBipartiteGraph.plain(15, OFFSETS_15))
        base = full_timing(graph, FoldPlan.for_graph(graph, 1, T=3))
        for q in (3, 5, 15):
            folded = full_timing(graph, FoldPlan.for_graph(graph, q, T=3))
            assert folded.half_length == q * base.half_length

    def test_intervals(self):
        graph, plan = running_example(T=2)
        timing = full_timing(graph, plan)
        table = {name: (start, end) for name, start, end in timing.intervals}
        assert table["row_half"] == (0, 36)
        assert table["col_half"] == (36, 72)
        assert table["row_read_window"] == (1, 24)
        assert table["row_write_window"] == (24, 36)
        out_win = table["row_reads_out_switch_enable"]
        in_win = table["row_reads_in_switch_enable"]
        assert in_win == (out_win[0] + 1, out_win[1] + 1)

    def test_serialization(self):
        graph, plan = running_example()
        data = full_timing(graph, plan).to_json_dict()
        assert data["pipeline_level"] == "none"
        assert len(data["read_cycles"]) == 12
        assert data["intervals"][0] == {"name": "row_half", "start": 0, "end": 24}


class TestResourceReport:
    def test_folded(self):
        graph, plan = running_example()
        report = resource_report(graph, plan)
        assert report["fold_factor"] == 3
        assert report["units_per_side"] == 5
        assert report["multiplexer_sets_avoided"] == 2
        assert report["wiring_factor_avoided"] == 3
        assert report["fold_select_control_avoided"] is True

    def test_unfolded(self):
        graph = pad_dummy_offset(CirculantBipartiteGraph.plain(15, OFFSETS_15))
        plan = FoldPlan.for_graph(graph, 1)
        report = resource_report(graph, plan)
        assert report["multiplexer_sets_avoided"] == 0
        assert report["fold_select_control_avoided"] is False


@st.composite
def folded_graphs(draw):
    order = draw(st.integers(min_value=4, max_value=60))
    degree = draw(st.integers(min_value=2, max_value=min(8, order)))
    offsets = draw(
        st.lists(
            st.integers(min_value=0, max_value=order - 1),
            min_size=degree,
            max_size=degree,
            unique=True,
        )
    )
    graph = pad_dummy_offset(CirculantBipartiteGraph.plain(order, offsets))
    from pgfold.circulant import divisors

    q = draw(st.sampled_from(divisors(order)))
    option = draw(st.sampled_from([1, 2]))
    return graph, FoldPlan.for_graph(graph, q, design_option=option)


class TestWriteScheduleProperties:
    @settings(max_examples=60, deadline=None)
    @given(folded_graphs())
    def test_bijective_and_reciprocal(self, case):
        graph, plan = case
        layout = layout_addresses(plan, graph)
        reserved = set(layout.reserved_addresses(graph.degree))
        for side in ("row", "col"):
            schedule = write_schedule(graph, plan, side)
            cons = [
                d for d in reader_offsets(graph, other_side(side)) if d is not None
            ]
            for pmu, entries in schedule.per_pmu().items():
                real_addrs = sorted(
                    e.address for e in entries if e.consumer is not None
                )
                assert real_addrs == sorted(set(range(layout.capacity)) - reserved)
            for e in schedule.entries:
                if e.consumer is None:
                    continue
                assert (cons[e.consumer_rank] + e.consumer) % plan.units_per_side == e.pmu
