"""Command line driver for the folded-architecture synthesis pipeline.

Subcommands mirror the pipeline stages so each stage can be run and
inspected on its own: build-pg, expand, fold, schedule, simulate, emit,
run (all-in-one), verify.  Every run is fully deterministic: identical
parameters produce byte-identical artifact directories.

Exit codes: 0 success, 1 verification failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import tempfile
from pathlib import Path

from .circulant import (
    CirculantBipartiteGraph,
    choose_alpha,
    divisors,
    expand_circulant,
)
from .emit import (
    EmissionConfig,
    emit_graph_json,
    emit_incidence_csv,
    plan_json_dict,
    write_run_directory,
)
from .folding import (
    FoldPlan,
    compute_rho,
    cross_fold_endpoints,
    generate_folded_sequence,
    pad_dummy_offset,
    verify_balance,
)
from .projective import PgParams, build_pg_graph, verify_pg_incidence
from .simulator import (
    SimulationStructureError,
    check_dataflow_equivalence,
    measure_throughput,
    simulate,
    summarize,
)

__all__ = ["main", "UsageError"]

FORMATS = ("csv", "json", "hdl")
PIPELINE_LEVELS = ("none", "writeback", "node", "graph")

DEFAULTS = {
    "geometry": None,
    "graph": None,
    "q": "auto",
    "alpha": None,
    "design_option": 1,
    "T": 1,
    "delta": 1,
    "pipeline": "none",
    "out": None,
    "emit": list(FORMATS),
    "target_f": [4, 8],
    "iterations": 1,
}


class UsageError(Exception):
    """A bad flag or config value; the message names the precondition
    violated and the nearest valid choices."""


# ---------------------------------------------------------------------------
# settings


def _parse_geometry(text: str) -> list[int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(
            f"--geometry expects three comma-separated integers n,p,s, got {text!r}"
        )
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise UsageError(
            f"--geometry expects three comma-separated integers n,p,s, got {text!r}"
        ) from None


def _parse_int_or_auto(text: str, flag: str) -> int | str:
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise UsageError(f"{flag} expects a positive integer or 'auto', got {text!r}") from None
    if value < 1:
        raise UsageError(f"{flag} expects a positive integer or 'auto', got {text!r}")
    return value


def _parse_emit(text: str) -> list[str]:
    parts = [p.strip() for p in text.split(",") if p.strip()]
    bad = sorted(set(parts) - set(FORMATS))
    if bad or not parts:
        raise UsageError(
            f"--emit expects a comma-separated subset of {','.join(FORMATS)}, got {text!r}"
        )
    return [f for f in FORMATS if f in parts]


def _validated(settings: dict) -> dict:
    if settings["geometry"] is not None:
        geometry = settings["geometry"]
        if isinstance(geometry, str):
            geometry = _parse_geometry(geometry)
        if not (
            isinstance(geometry, (list, tuple))
            and len(geometry) == 3
            and all(isinstance(v, int) for v in geometry)
        ):
            raise UsageError(f"geometry must be three integers n,p,s, got {geometry!r}")
        settings["geometry"] = list(geometry)
    for key, flag in (("q", "--q"), ("alpha", "--alpha")):
        value = settings[key]
        if isinstance(value, str) and value != "auto":
            settings[key] = _parse_int_or_auto(value, flag)
        elif isinstance(value, int) and value < 1:
            raise UsageError(f"{flag} expects a positive integer or 'auto', got {value}")
    if isinstance(settings["emit"], str):
        settings["emit"] = _parse_emit(settings["emit"])
    elif not (
        isinstance(settings["emit"], list)
        and settings["emit"]
        and set(settings["emit"]) <= set(FORMATS)
    ):
        raise UsageError(
            f"emit must be a non-empty subset of {list(FORMATS)}, got {settings['emit']!r}"
        )
    else:
        settings["emit"] = [f for f in FORMATS if f in settings["emit"]]
    target = settings["target_f"]
    if not (
        isinstance(target, (list, tuple))
        and len(target) == 2
        and all(isinstance(v, int) for v in target)
        and 1 <= target[0] <= target[1]
    ):
        raise UsageError(
            f"target_f must be two integers [lo, hi] with 1 <= lo <= hi, got {target!r}"
        )
    settings["target_f"] = list(target)
    for key in ("design_option", "T", "delta", "iterations"):
        if not isinstance(settings[key], int):
            raise UsageError(f"{key} must be an integer, got {settings[key]!r}")
    if settings["design_option"] not in (1, 2):
        raise UsageError(
            f"design option must be 1 or 2, got {settings['design_option']}"
        )
    if settings["pipeline"] not in PIPELINE_LEVELS:
        raise UsageError(
            f"pipeline level must be one of {', '.join(PIPELINE_LEVELS)}, "
            f"got {settings['pipeline']!r}"
        )
    if settings["iterations"] < 1:
        raise UsageError(f"iterations must be >= 1, got {settings['iterations']}")
    return settings


def resolve_settings(args: argparse.Namespace) -> dict:
    """Defaults, overlaid by the config file, overlaid by explicit flags."""
    settings = {key: (list(v) if isinstance(v, list) else v) for key, v in DEFAULTS.items()}
    config_path = getattr(args, "config", None)
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise UsageError(f"config file {path} not found")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file root must be a JSON object")
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise UsageError(
                f"unknown config keys {unknown}; valid keys are {sorted(DEFAULTS)}"
            )
        settings.update(data)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    return _validated(settings)


# ---------------------------------------------------------------------------
# pipeline assembly


def _acquire_graph(settings: dict) -> CirculantBipartiteGraph:
    geometry, graph_file = settings["geometry"], settings["graph"]
    if (geometry is None) == (graph_file is None):
        raise UsageError(
            "exactly one input is required: --geometry n,p,s or --graph FILE"
        )
    if geometry is not None:
        n, p, s = geometry
        try:
            params = PgParams(n=n, p=p, s=s)
            graph = build_pg_graph(params)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        report = verify_pg_incidence(graph, params)
        if not report.ok:
            raise AssertionError(
                f"incidence self-check failed for P({n}, GF({p}^{s})): "
                f"{report.failures[:3]}"
            )
        return graph
    path = Path(graph_file)
    if not path.is_file():
        raise UsageError(f"graph file {path} not found")
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        return CirculantBipartiteGraph.from_json_dict(data)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"graph file {path} is not a valid graph: {exc}") from None


def _alpha_candidates_for_divisibility(order: int, q: int, count: int = 3) -> list[int]:
    first = (q - order % q) % q
    if first == 0:
        first = q
    return [first + i * q for i in range(count)]


def _divisor_table(order: int) -> str:
    return ", ".join(f"q={d} gives {order // d} units" for d in divisors(order))


def _resolve_fold_inputs(settings: dict) -> tuple[CirculantBipartiteGraph, int]:
    """Acquire the graph, expand it if requested or needed, pick q."""
    graph = _acquire_graph(settings)
    q_setting, alpha_setting = settings["q"], settings["alpha"]
    lo, hi = settings["target_f"]
    if isinstance(alpha_setting, int):
        try:
            graph = expand_circulant(graph, alpha_setting)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    order = graph.order
    if q_setting == "auto":
        fits = [q for q in divisors(order) if q > 1 and lo <= order // q <= hi]
        if fits:
            q = fits[0]
        elif alpha_setting == "auto":
            candidates = choose_alpha(graph, (lo, hi))
            if not candidates:
                raise UsageError(
                    f"no expansion up to alpha={order} gives the order-{order} graph "
                    f"a unit count in [{lo}, {hi}]"
                )
            best = candidates[0]
            graph = expand_circulant(graph, best["alpha"])
            order = graph.order
            q = [qq for qq in best["fold_factors"] if lo <= order // qq <= hi][0]
        else:
            hints = [c["alpha"] for c in choose_alpha(graph, (lo, hi))[:3]]
            raise UsageError(
                f"q=auto found no fold factor of the order-{order} graph with a "
                f"unit count in [{lo}, {hi}] ({_divisor_table(order)}); pass "
                f"--alpha auto or expand first with an alpha from {hints}"
            )
    else:
        q = q_setting
        if order % q != 0:
            if alpha_setting == "auto":
                alpha = _alpha_candidates_for_divisibility(order, q)[0]
                graph = expand_circulant(graph, alpha)
            else:
                raise UsageError(
                    f"fold factor {q} does not divide the graph order {order}; "
                    f"valid fold factors are {divisors(order)}, or expand first: "
                    f"alpha candidates for q={q} are "
                    f"{_alpha_candidates_for_divisibility(order, q)}"
                )
    return pad_dummy_offset(graph), q


def _build_plan(graph: CirculantBipartiteGraph, settings: dict, q: int) -> FoldPlan:
    try:
        return FoldPlan.for_graph(
            graph,
            q,
            design_option=settings["design_option"],
            T=settings["T"],
            delta=settings["delta"],
            pipeline_level=settings["pipeline"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _require_out(settings: dict) -> Path:
    if not settings["out"]:
        raise UsageError("--out DIR is required for this subcommand")
    return Path(settings["out"])


def _json_text(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _write_sim_outputs(run_dir: Path, report, verdict: dict) -> None:
    """Store the simulation verdicts and fold them into the manifest."""
    extra = {
        "sim_report.json": _json_text(
            {**report.to_json_dict(), "dataflow": verdict}
        ),
        "sim_summary.txt": summarize(report),
    }
    for name, text in extra.items():
        (run_dir / name).write_text(text, encoding="utf-8")
    manifest_path = run_dir / "manifest.json"
    if manifest_path.is_file():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        for name, text in extra.items():
            manifest["files"][name] = _sha256(text)
        manifest_path.write_text(_json_text(manifest), encoding="utf-8")


def _simulate_directory(run_dir: Path, iterations: int) -> tuple[object, dict]:
    try:
        report = simulate(run_dir, iterations=iterations)
    except SimulationStructureError as exc:
        if "missing artifact" in str(exc):
            raise UsageError(f"{exc} in {run_dir}") from None
        raise
    verdict = check_dataflow_equivalence(report, run_dir)
    return report, verdict


# ---------------------------------------------------------------------------
# subcommands


def cmd_build_pg(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    if settings["geometry"] is None:
        raise UsageError("build-pg requires --geometry n,p,s")
    settings["graph"] = None
    out = _require_out(settings)
    graph = _acquire_graph(settings)
    out.mkdir(parents=True, exist_ok=True)
    (out / "graph.json").write_text(emit_graph_json(graph), encoding="utf-8")
    (out / "incidence.csv").write_text(emit_incidence_csv(graph), encoding="utf-8")
    n, p, s = settings["geometry"]
    print(
        f"built P({n}, GF({p}^{s})): order {graph.order}, degree {graph.degree}; "
        f"wrote graph.json and incidence.csv to {out}"
    )
    return 0


def cmd_expand(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    if settings["graph"] is None:
        raise UsageError("expand requires --graph FILE")
    settings["geometry"] = None
    out = _require_out(settings)
    graph = _acquire_graph(settings)
    alpha_setting = settings["alpha"]
    if alpha_setting is None:
        raise UsageError("expand requires --alpha INT or --alpha auto")
    if alpha_setting == "auto":
        q_setting = settings["q"]
        if isinstance(q_setting, int):
            alpha = _alpha_candidates_for_divisibility(graph.order, q_setting)[0]
        else:
            lo, hi = settings["target_f"]
            candidates = choose_alpha(graph, (lo, hi))
            if not candidates:
                raise UsageError(
                    f"no expansion up to alpha={graph.order} gives the "
                    f"order-{graph.order} graph a unit count in [{lo}, {hi}]"
                )
            alpha = candidates[0]["alpha"]
    else:
        alpha = alpha_setting
    try:
        expanded = expand_circulant(graph, alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out.mkdir(parents=True, exist_ok=True)
    (out / "graph.json").write_text(emit_graph_json(expanded), encoding="utf-8")
    (out / "incidence.csv").write_text(emit_incidence_csv(expanded), encoding="utf-8")
    print(
        f"expanded order {graph.order} to {expanded.order} (alpha {alpha}, "
        f"degree {expanded.degree}); wrote graph.json and incidence.csv to {out}"
    )
    return 0


def cmd_fold(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    out = _require_out(settings)
    graph, q = _resolve_fold_inputs(settings)
    plan = _build_plan(settings=settings, graph=graph, q=q)
    out.mkdir(parents=True, exist_ok=True)
    (out / "graph.json").write_text(emit_graph_json(graph), encoding="utf-8")
    (out / "plan.json").write_text(_json_text(plan_json_dict(plan)), encoding="utf-8")
    for side in ("row", "col"):
        sequence = generate_folded_sequence(graph, plan, side)
        (out / f"fold_{side}.json").write_text(
            _json_text(sequence.to_json_dict()), encoding="utf-8"
        )
    print(
        f"folded order {graph.order} by q={plan.q} into {plan.units_per_side} "
        f"units per side; wrote graph.json, plan.json, fold_row.json, "
        f"fold_col.json to {out}"
    )
    return 0


def _emit_directory(settings: dict, formats: tuple[str, ...]) -> tuple[Path, dict]:
    out = _require_out(settings)
    graph, q = _resolve_fold_inputs(settings)
    plan = _build_plan(settings=settings, graph=graph, q=q)
    try:
        manifest = write_run_directory(
            out, graph, plan, config=EmissionConfig(formats=formats)
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return out, manifest


def cmd_schedule(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    out, manifest = _emit_directory(settings, ("csv", "json"))
    print(f"wrote {len(manifest['files'])} schedule artifacts to {out}")
    return 0


def cmd_emit(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    out, manifest = _emit_directory(settings, tuple(settings["emit"]))
    print(
        f"wrote {len(manifest['files'])} artifacts ({', '.join(settings['emit'])}) "
        f"to {out}"
    )
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    run_dir = _require_out(settings)
    if not run_dir.is_dir():
        raise UsageError(f"run directory {run_dir} not found")
    try:
        report, verdict = _simulate_directory(run_dir, settings["iterations"])
    except SimulationStructureError as exc:
        print(f"structural inconsistency: {exc}", file=sys.stderr)
        print("simulate: FAIL")
        return 1
    _write_sim_outputs(run_dir, report, verdict)
    sys.stdout.write(summarize(report))
    if not verdict["ok"]:
        for failure in verdict["failures"][:10]:
            print(f"dataflow: {failure}")
        print("simulate: FAIL")
        return 1
    print("simulate: PASS")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    formats = tuple(settings["emit"])
    if not {"csv", "json"} <= set(formats):
        raise UsageError(
            "run simulates the emitted files, so --emit must include csv and json"
        )
    out, manifest = _emit_directory(settings, formats)
    try:
        report, verdict = _simulate_directory(out, settings["iterations"])
    except SimulationStructureError as exc:
        print(f"structural inconsistency: {exc}", file=sys.stderr)
        print("run: FAIL")
        return 1
    _write_sim_outputs(out, report, verdict)
    print(f"wrote {len(manifest['files']) + 2} artifacts to {out}")
    sys.stdout.write(summarize(report))
    if not verdict["ok"]:
        for failure in verdict["failures"][:10]:
            print(f"dataflow: {failure}")
        print("run: FAIL")
        return 1
    print("run: PASS")
    return 0


# ---------------------------------------------------------------------------
# verify


def _plan_from_json(data: dict) -> FoldPlan:
    return FoldPlan(
        q=data["q"],
        units_per_side=data["units_per_side"],
        design_option=data["design_option"],
        T=data["T"],
        delta=data["delta"],
        pipeline_level=data["pipeline_level"],
    )


def _detect_formats(run_dir: Path) -> tuple[str, ...]:
    formats = []
    if any(run_dir.glob("*.csv")):
        formats.append("csv")
    if (run_dir / "graph.json").is_file():
        formats.append("json")
    if (run_dir / "hdl").is_dir():
        formats.append("hdl")
    return tuple(formats)


def _verify_run_directory(run_dir: Path, iterations: int) -> tuple[bool, list[str]]:
    checks: list[str] = []
    failed = False

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal failed
        failed = failed or not ok
        suffix = f" ({detail})" if detail else ""
        checks.append(f"{name}: {'ok' if ok else 'FAIL'}{suffix}")

    for required in ("graph.json", "plan.json", "manifest.json"):
        if not (run_dir / required).is_file():
            raise UsageError(f"missing artifact {required} in {run_dir}")
    graph = CirculantBipartiteGraph.from_json_dict(
        json.loads((run_dir / "graph.json").read_text(encoding="utf-8"))
    )
    plan = _plan_from_json(
        json.loads((run_dir / "plan.json").read_text(encoding="utf-8"))
    )

    # Incidence structure, when the graph came from a geometry.
    if graph.geometry is not None and graph.order == graph.real_order:
        params = PgParams(*graph.geometry)
        report = verify_pg_incidence(graph, params)
        check("incidence", report.ok, f"P{tuple(graph.geometry)}")
    else:
        checks.append("incidence: skipped (expanded or hand-supplied graph)")

    # Folded-sequence invariants.
    balance_ok = True
    details = []
    for side in ("row", "col"):
        sequence = generate_folded_sequence(graph, plan, side)
        result = verify_balance(sequence, graph, plan)
        balance_ok = balance_ok and result.ok
        cross_fold_endpoints(graph, plan, side)
        rho, theta, rho_hat = compute_rho(graph, plan, side)
        details.append(f"{side} rho={rho} theta={theta} rho_hat={rho_hat}")
    check("schedule balance and endpoints", balance_ok, "; ".join(details))

    # Byte-identical re-derivation of every emitted artifact.
    formats = _detect_formats(run_dir)
    with tempfile.TemporaryDirectory() as scratch:
        fresh_dir = Path(scratch) / "fresh"
        fresh_manifest = write_run_directory(
            fresh_dir, graph, plan, config=EmissionConfig(formats=formats)
        )
        mismatched = []
        for name in sorted(fresh_manifest["files"]):
            fresh_text = (fresh_dir / name).read_text(encoding="utf-8")
            stored = run_dir / name
            if not stored.is_file():
                mismatched.append(f"{name} missing")
            elif stored.read_text(encoding="utf-8") != fresh_text:
                mismatched.append(name)
        check(
            "re-derivation",
            not mismatched,
            f"{len(fresh_manifest['files'])} artifacts"
            if not mismatched
            else f"differs: {mismatched[:5]}",
        )
        expected_names = set(fresh_manifest["files"]) | {
            "manifest.json",
            "sim_report.json",
            "sim_summary.txt",
        }

    # Manifest completeness and hashes.
    manifest = json.loads((run_dir / "manifest.json").read_text(encoding="utf-8"))
    on_disk = {
        str(p.relative_to(run_dir)).replace("\\", "/")
        for p in run_dir.rglob("*")
        if p.is_file()
    }
    problems = []
    for name, digest in sorted(manifest.get("files", {}).items()):
        path = run_dir / name
        if not path.is_file():
            problems.append(f"{name} listed but absent")
        elif _sha256(path.read_text(encoding="utf-8")) != digest:
            problems.append(f"{name} hash mismatch")
    unlisted = on_disk - set(manifest.get("files", {})) - {"manifest.json"}
    problems.extend(f"{name} on disk but unlisted" for name in sorted(unlisted))
    stray = on_disk - expected_names
    problems.extend(f"{name} unexpected" for name in sorted(stray))
    check(
        "manifest",
        not problems,
        f"{len(manifest.get('files', {}))} files hashed"
        if not problems
        else f"{problems[:5]}",
    )

    # Cycle-accurate replay of the emitted files.
    try:
        report, verdict = _simulate_directory(run_dir, iterations)
    except SimulationStructureError as exc:
        check("simulation", False, str(exc))
        return (not failed), checks
    check(
        "simulation",
        report.ok,
        f"{len(report.conflicts)} conflicts, {len(report.misroutes)} misroutes, "
        f"{len(report.file_mismatches)} file mismatches",
    )
    check(
        "dataflow equivalence",
        verdict["ok"],
        f"{report.real_tokens['row']}+{report.real_tokens['col']} real tokens",
    )

    # Throughput against an unfolded build of the same graph.
    with tempfile.TemporaryDirectory() as scratch:
        flat_dir = Path(scratch) / "flat"
        flat_plan = FoldPlan.for_graph(
            graph,
            1,
            design_option=plan.design_option,
            T=plan.T,
            delta=plan.delta,
            pipeline_level=plan.pipeline_level,
        )
        write_run_directory(
            flat_dir, graph, flat_plan, config=EmissionConfig(formats=("csv", "json"))
        )
        flat_report = simulate(flat_dir)
    throughput = measure_throughput(report, flat_report, q=plan.q)
    check(
        "throughput",
        throughput["ok"],
        f"ratio {throughput['ratio']:.2f} within fold factor {plan.q}",
    )
    return (not failed), checks


def cmd_verify(args: argparse.Namespace) -> int:
    settings = resolve_settings(args)
    out = settings["out"]
    if out and Path(out).is_dir():
        passed, checks = _verify_run_directory(Path(out), settings["iterations"])
    elif settings["geometry"] is not None or settings["graph"] is not None:
        with tempfile.TemporaryDirectory() as scratch:
            settings = dict(settings)
            settings["out"] = str(Path(scratch) / "run")
            formats = tuple(settings["emit"])
            if not {"csv", "json"} <= set(formats):
                formats = ("csv", "json")
            run_dir, _ = _emit_directory(settings, formats)
            report, verdict = _simulate_directory(run_dir, settings["iterations"])
            _write_sim_outputs(run_dir, report, verdict)
            passed, checks = _verify_run_directory(run_dir, settings["iterations"])
    else:
        raise UsageError(
            "verify needs an existing run directory (--out DIR) or pipeline "
            "inputs (--geometry/--graph, optionally --config)"
        )
    for line in checks:
        print(line)
    print(f"verify: {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# parser


def _add_common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--geometry", help="projective geometry as n,p,s")
    sub.add_argument("--graph", help="path to a graph JSON file")
    sub.add_argument("--q", help="fold factor (positive integer or 'auto')")
    sub.add_argument(
        "--alpha", help="expansion size (positive integer or 'auto'; omit to disable)"
    )
    sub.add_argument(
        "--design-option",
        dest="design_option",
        type=int,
        choices=(1, 2),
        help="slot ordering: 1 pattern-major, 2 fold-major",
    )
    sub.add_argument("--T", type=int, help="compute period in cycles per slot")
    sub.add_argument("--delta", type=int, help="interconnect latency in cycles")
    sub.add_argument(
        "--pipeline",
        choices=PIPELINE_LEVELS,
        help="pipelining level",
    )
    sub.add_argument("--out", help="output (or run) directory")
    sub.add_argument("--emit", help="comma-separated formats from csv,json,hdl")
    sub.add_argument("--config", help="JSON config file; explicit flags win")
    sub.add_argument(
        "--iterations", type=int, help="iterations to simulate (default 1)"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgfold",
        description=(
            "Synthesize folded semi-parallel architectures from circulant "
            "bipartite graphs: conflict-free schedules, memory maps, switch "
            "tables, netlists, HDL, and a verifying simulator."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands = (
        ("build-pg", cmd_build_pg, "build a projective-geometry graph"),
        ("expand", cmd_expand, "grow a graph with dummy nodes to a composite order"),
        ("fold", cmd_fold, "compute the folded access sequences"),
        ("schedule", cmd_schedule, "emit schedules, layouts, tables, and netlist"),
        ("simulate", cmd_simulate, "replay an emitted run directory cycle by cycle"),
        ("emit", cmd_emit, "emit artifacts in the chosen formats"),
        ("run", cmd_run, "full pipeline: build, fold, schedule, emit, simulate"),
        ("verify", cmd_verify, "re-derive, re-hash, and re-simulate a run"),
    )
    for name, func, help_text in commands:
        command = sub.add_parser(name, help=help_text)
        _add_common_flags(command)
        command.set_defaults(func=func)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
