"""Command-line entry point: evaluate, compare, optimize, select, falsify, report.

Batch, non-interactive. Every verb writes a run manifest (tool version,
config hashes, seed, timestamps, input/output paths) next to its outputs,
and is deterministic given its flags and seed. Exit codes: 0 success,
1 internal error, 2 input error, 10/11 comparison verdicts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
import sys
import time

import click

from . import __version__

log = logging.getLogger("rulebench")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INPUT = 2
EXIT_PREFER_A = 10
EXIT_PREFER_B = 11


def _setup_logging() -> None:
    level = os.environ.get("RULEBENCH_LOG", "warning").lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO,
              "warning": logging.WARNING, "quiet": logging.ERROR}
    logging.basicConfig(stream=sys.stderr, level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()[:16]


def _write_manifest(out_dir, verb: str, seed, inputs: dict, outputs: list) -> None:
    manifest = {
        "tool": "rulebench",
        "version": __version__,
        "verb": verb,
        "seed": seed,
        "started_unix": _write_manifest.started,
        "finished_unix": time.time(),
        "inputs": {k: {"path": str(p), "sha256_16": _file_hash(p)}
                   for k, p in inputs.items() if p is not None},
        "outputs": [str(p) for p in outputs],
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=1)
        fh.write("\n")


def _begin(out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _write_manifest.started = time.time()


_write_manifest.started = 0.0


def _load_rulebook(path):
    from .rulebook import default_rulebook_config, load_rulebook

    if path is None:
        return default_rulebook_config()
    return load_rulebook(path)


class _InputError(click.ClickException):
    exit_code = EXIT_INPUT


def _input_errors(fn):
    """Map malformed-input exceptions to exit code 2 with diagnostics."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        from .scenario import ScenarioError
        from .sim import InstantiationError
        from .world import TraceFormatError

        try:
            return fn(*args, **kwargs)
        except (TraceFormatError, ScenarioError, InstantiationError,
                FileNotFoundError, json.JSONDecodeError) as exc:
            raise _InputError(str(exc)) from exc
        except (KeyError, ValueError) as exc:
            raise _InputError(f"{type(exc).__name__}: {exc}") from exc

    return wrapper


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Multi-objective trajectory evaluation toolkit."""
    _setup_logging()


@main.command()
@click.option("--trace", "trace_path", required=True, type=click.Path(exists=True))
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--rulebook", "rulebook_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@_input_errors
def evaluate(trace_path, map_path, rulebook_path, out_dir) -> None:
    """Score one trace against the rule catalog and report error values."""
    from .rulebook import error_value
    from .rules import evaluate_all
    from .world import load_map, load_trace

    _begin(out_dir)
    config = _load_rulebook(rulebook_path)
    trace = load_trace(trace_path)
    map_model = load_map(map_path)
    vec = evaluate_all(trace, map_model, config.rule_config.params,
                       config.rule_config.variants)
    value, norm = error_value(config.hierarchy.flatten(), vec)
    violated = sorted(str(r) for r in vec.violated())
    click.echo(f"{'rule':>6}  {'score':>12}  verdict")
    for rid in vec.rule_ids():
        s = vec.score(rid)
        click.echo(f"{str(rid):>6}  {s:12.6g}  "
                   f"{'VIOLATED' if s > 1e-9 else 'ok'}")
    for rid in sorted(vec.inapplicable, key=str):
        click.echo(f"{str(rid):>6}  {'-':>12}  inapplicable")
    click.echo(f"error value: {value:g}")
    click.echo(f"normalized error value: {norm:.6f}")
    report = {
        "scores": vec.to_json_dict(),
        "violated": violated,
        "error_value": value,
        "normalized_ev": norm,
    }
    report_path = os.path.join(out_dir, "evaluation.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    _write_manifest(out_dir, "evaluate", None,
                    {"trace": trace_path, "map": map_path,
                     "rulebook": rulebook_path}, [report_path])


@main.command()
@click.option("--trace-a", required=True, type=click.Path(exists=True))
@click.option("--trace-b", required=True, type=click.Path(exists=True))
@click.option("--map", "map_path", required=True, type=click.Path(exists=True))
@click.option("--rulebook", "rulebook_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.pass_context
@_input_errors
def compare(ctx, trace_a, trace_b, map_path, rulebook_path, out_dir) -> None:
    """Rank two traces; exit code 10 prefers A, 11 prefers B, 0 indifferent."""
    from .rulebook import Preference, compare as book_compare
    from .rules import evaluate_all
    from .world import load_map, load_trace

    _begin(out_dir)
    config = _load_rulebook(rulebook_path)
    map_model = load_map(map_path)
    vecs = []
    for path in (trace_a, trace_b):
        trace = load_trace(path)
        vecs.append(evaluate_all(trace, map_model, config.rule_config.params,
                                 config.rule_config.variants))
    verdict = book_compare(config.hierarchy, vecs[0], vecs[1])
    click.echo(f"verdict: {verdict.verdict.value}")
    if verdict.deciding_rule is not None:
        click.echo(f"deciding rule: {verdict.deciding_rule}")
    report_path = os.path.join(out_dir, "comparison.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump({"verdict": verdict.verdict.value,
                   "deciding_rule": (str(verdict.deciding_rule)
                                     if verdict.deciding_rule else None),
                   "vector_a": vecs[0].to_json_dict(),
                   "vector_b": vecs[1].to_json_dict()},
                  fh, sort_keys=True, indent=1)
        fh.write("\n")
    _write_manifest(out_dir, "compare", None,
                    {"trace_a": trace_a, "trace_b": trace_b, "map": map_path,
                     "rulebook": rulebook_path}, [report_path])
    codes = {Preference.PREFER_A: EXIT_PREFER_A,
             Preference.PREFER_B: EXIT_PREFER_B,
             Preference.INDIFFERENT: EXIT_OK}
    ctx.exit(codes[verdict.verdict])


@main.command()
@click.option("--mode", type=click.Choice(["priority", "params"]), required=True)
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--rulebook", "rulebook_path", type=click.Path(exists=True))
@click.option("--restricted", is_flag=True, help="Swap only adjacent groups.")
@click.option("--pin", "pinned", multiple=True, help="Group name that never moves.")
@click.option("--grid", "grid_path", type=click.Path(exists=True),
              help="JSON {parameter: [candidates...]} for --mode params.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@_input_errors
def optimize(mode, dataset_path, rulebook_path, restricted, pinned, grid_path,
             out_dir) -> None:
    """Tune group priorities or rule thresholds against preference data."""
    from .optimize import CandidateGrid, optimize_parameters, optimize_priority
    from .prefdata import compute_vectors, load_dataset
    from .rulebook import RulebookConfig, dump_rulebook

    _begin(out_dir)
    config = _load_rulebook(rulebook_path)
    dataset = load_dataset(dataset_path, load_traces=True)
    dataset = compute_vectors(dataset, config.rule_config)

    if mode == "priority":
        result = optimize_priority(config.hierarchy, dataset,
                                   restricted=restricted, pinned=pinned)
        tuned = RulebookConfig(result.hierarchy, config.rule_config)
        log_rows = result.log
        click.echo(f"iterations: {result.iterations}")
        click.echo("accuracy trace: "
                   + " -> ".join(f"{a:.4f}" for a in result.accuracy_trace))
    else:
        if grid_path is None:
            raise click.UsageError("--mode params requires --grid")
        with open(grid_path, "r", encoding="utf-8") as fh:
            grid = CandidateGrid(json.load(fh))
        result = optimize_parameters(config, dataset, grid)
        tuned = result.config
        log_rows = result.log
        click.echo("accuracy trace: "
                   + " -> ".join(f"{a:.4f}" for a in result.accuracy_trace))

    tuned_path = os.path.join(out_dir, "rulebook.json")
    dump_rulebook(tuned, tuned_path)
    log_path = os.path.join(out_dir, "optimization_log.jsonl")
    with open(log_path, "w", encoding="utf-8") as fh:
        for row in log_rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    click.echo(f"final accuracy: {result.accuracy:.4f}")
    _write_manifest(out_dir, "optimize", None,
                    {"dataset": dataset_path, "rulebook": rulebook_path,
                     "grid": grid_path}, [tuned_path, log_path])


@main.command()
@click.option("--cars", type=int, default=2, show_default=True)
@click.option("--pedestrians", type=int, default=0, show_default=True)
@click.option("-k", "--count", "k", type=int, required=True)
@click.option("--map", "map_id", default="auto", show_default=True,
              help="Builtin map for emitted specs; 'auto' picks per spec.")
@click.option("--emit-scenic", is_flag=True, help="Also write .scenic program text.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@_input_errors
def select(cars, pedestrians, k, map_id, emit_scenic, out_dir) -> None:
    """Pick a k-center-greedy scenario coreset and report its coverage."""
    from .scenario import (SpaceConfig, coverage_report, dump_scenario,
                           enumerate_space, generate_scenic_text, select_coreset,
                           spec_from_encoding)

    _begin(out_dir)
    space = enumerate_space(SpaceConfig(cars, pedestrians))
    subset = select_coreset(space, k)
    report = coverage_report(subset, space)

    click.echo(f"space size: {len(space)}  dimensions: {space[0].dimension}")
    click.echo(f"selected: {len(subset)}")
    click.echo(f"max residual distance: {report.max_residual_distance}")
    click.echo(f"ego maneuver coverage: {report.ego_maneuver_coverage:.0%}")
    click.echo(f"adversary maneuver coverage: {report.adv_maneuver_coverage:.0%}")
    click.echo(f"adversary relation coverage: {report.adv_relation_coverage:.0%}")
    click.echo(f"relation-maneuver pair coverage: {report.pair_coverage:.0%}")

    outputs = []
    coreset_path = os.path.join(out_dir, "coreset.json")
    with open(coreset_path, "w", encoding="utf-8") as fh:
        json.dump({"space_size": len(space),
                   "encodings": [list(e.symbols()) for e in subset],
                   "coverage": report.as_dict()}, fh, sort_keys=True, indent=1)
        fh.write("\n")
    outputs.append(coreset_path)
    spec_dir = os.path.join(out_dir, "specs")
    os.makedirs(spec_dir, exist_ok=True)
    from .sim.maps import suggest_map_id

    for i, enc in enumerate(subset):
        spec = spec_from_encoding(enc, f"coreset_{i:04d}", "four_way")
        if map_id == "auto":
            spec = spec_from_encoding(enc, f"coreset_{i:04d}",
                                      suggest_map_id(spec))
        else:
            spec = spec_from_encoding(enc, f"coreset_{i:04d}", map_id)
        spec_path = os.path.join(spec_dir, f"coreset_{i:04d}.json")
        dump_scenario(spec, spec_path)
        outputs.append(spec_path)
        if emit_scenic:
            scenic_path = os.path.join(spec_dir, f"coreset_{i:04d}.scenic")
            with open(scenic_path, "w", encoding="utf-8") as fh:
                fh.write(generate_scenic_text(spec))
            outputs.append(scenic_path)
    _write_manifest(out_dir, "select", None, {}, outputs)


@main.command()
@click.option("--scenario", "scenario_path", type=click.Path(exists=True),
              help="Single scenario spec file.")
@click.option("--suite", "suite_path", type=click.Path(exists=True),
              help="Suite manifest; bundled smoke suite when neither is given.")
@click.option("--agent", default="rule_based", show_default=True)
@click.option("--rulebook", "rulebook_path", type=click.Path(exists=True))
@click.option("--budget", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--duration", type=float, default=20.0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel workers across suite scenarios.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@_input_errors
def falsify(scenario_path, suite_path, agent, rulebook_path, budget, seed,
            duration, jobs, out_dir) -> None:
    """Hunt rule violations with bandit-guided parameter sampling."""
    from .falsify import dump_report, falsify as falsify_one, load_suite, suite_report
    from .scenario import load_scenario
    from .sim import make_agent

    _begin(out_dir)
    config = _load_rulebook(rulebook_path)
    if scenario_path is not None:
        entries = [{"spec": load_scenario(scenario_path), "duration": duration,
                    "budget": budget}]
    else:
        entries = load_suite(suite_path)
        for e in entries:
            e["budget"] = budget

    tasks = [(e["spec"], agent, config, e["budget"], seed + 1000 * i,
              e["duration"]) for i, e in enumerate(entries)]
    if jobs > 1 and len(tasks) > 1:
        import concurrent.futures as cf

        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_falsify_task, tasks))
    else:
        reports = [_falsify_task(t) for t in tasks]

    outputs = []
    for rep in reports:
        rows_path = os.path.join(out_dir, f"{rep.scenario}_rows.jsonl")
        summary_path = os.path.join(out_dir, f"{rep.scenario}_summary.json")
        dump_report(rep, rows_path, summary_path)
        outputs.extend([rows_path, summary_path])
        s = rep.summary()
        click.echo(f"{rep.scenario}: CE ratio {s['ce_ratio']:.2f}, "
                   f"avg EV {s['avg_ev']:.3f}, max EV {s['max_ev']:.3f}, "
                   f"unique violations {s['unique_violations']}")
    suite = suite_report(reports)
    suite_path_out = os.path.join(out_dir, "suite_summary.json")
    with open(suite_path_out, "w", encoding="utf-8") as fh:
        json.dump(suite.summary(), fh, sort_keys=True, indent=1)
        fh.write("\n")
    outputs.append(suite_path_out)
    click.echo(f"cross-suite violated rules: "
               f"{suite.cross_suite_violated_pct():.0%}")
    _write_manifest(out_dir, "falsify", seed,
                    {"scenario": scenario_path, "suite": suite_path,
                     "rulebook": rulebook_path}, outputs)


def _falsify_task(task):
    from .falsify import falsify as falsify_one
    from .sim import make_agent

    spec, agent_name, config, budget, seed, duration = task
    return falsify_one(spec, make_agent(agent_name), config, budget, seed,
                       duration=duration)


@main.command()
@click.argument("input_paths", nargs=-1, required=True,
                type=click.Path(exists=True))
@click.option("--out", "out_dir", required=True, type=click.Path())
@_input_errors
def report(input_paths, out_dir) -> None:
    """Summaries (CSV) and EV-distribution plots (SVG) from row files."""
    from .falsify import load_report

    _begin(out_dir)
    reports = [load_report(p) for p in input_paths]
    csv_path = os.path.join(out_dir, "summary.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "agent", "valid_samples", "avg_ev",
                         "max_ev", "ce_ratio", "violated_rules_pct",
                         "unique_violations"])
        for rep in reports:
            s = rep.summary()
            writer.writerow([s["scenario"], s["agent"], s["valid_samples"],
                             f"{s['avg_ev']:.6f}", f"{s['max_ev']:.6f}",
                             f"{s['ce_ratio']:.6f}",
                             f"{s['violated_rules_pct']:.6f}",
                             s["unique_violations"]])
    outputs = [csv_path]
    for rep in reports:
        svg_path = os.path.join(out_dir, f"{rep.scenario}_ev.svg")
        with open(svg_path, "w", encoding="utf-8") as fh:
            fh.write(_ev_histogram_svg(rep))
        outputs.append(svg_path)
        s = rep.summary()
        click.echo(f"{s['scenario']}: {s['valid_samples']} samples, "
                   f"avg EV {s['avg_ev']:.3f}")
    _write_manifest(out_dir, "report", None,
                    {f"input_{i}": p for i, p in enumerate(input_paths)}, outputs)


def _ev_histogram_svg(rep, bins: int = 10, width: int = 420,
                      height: int = 240) -> str:
    counts = [0] * bins
    for row in rep.valid_rows:
        b = min(int(row.normalized_ev * bins), bins - 1)
        counts[b] += 1
    peak = max(max(counts), 1)
    bar_w = (width - 60) / bins
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<text x="{width // 2}" y="16" text-anchor="middle" '
        f'font-size="12">{rep.scenario} - normalized EV distribution</text>',
        f'<line x1="40" y1="{height - 30}" x2="{width - 10}" '
        f'y2="{height - 30}" stroke="black"/>',
    ]
    for i, c in enumerate(counts):
        h = (height - 70) * c / peak
        x = 40 + i * bar_w
        y = height - 30 - h
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w - 2:.1f}" '
                     f'height="{h:.1f}" fill="#4878a8"/>')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{height - 16}" '
                     f'text-anchor="middle" font-size="9">'
                     f'{i / bins:.1f}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


if __name__ == "__main__":
    main()
