"""Command-line interface: dataset inspection, online runs, batch comparisons.

Every run resolves its full configuration, writes it as config.json next to
the outputs, and is reproducible byte-for-byte by replaying that file with
--config. All randomness flows from the single --seed value. Exit codes:
0 success, 1 usage, 2 data error, 3 training failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .data import DataFormatError, SplitPlan, load_csv
from .evaluation import run_batch, run_online_nn, run_online_venn
from .mlp import MLPConfig, TrainingDivergedError, TrainingFailedError
from .taxonomy import TAXONOMY_KINDS, TaxonomyRule

_CONFIG_NAME = "config.json"


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format(v, ".12g") if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _apply_config_file(ctx: click.Context, config_path: str | None) -> None:
    """Fill parameters from a saved config.json, keeping explicit flags."""
    if config_path is None:
        return
    try:
        saved = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as err:
        raise click.UsageError(f"cannot read config file {config_path}: {err}")
    for name, value in saved.items():
        if name in ctx.params and ctx.get_parameter_source(name) != click.core.ParameterSource.COMMANDLINE:
            ctx.params[name] = value


def _load_dataset(path: str, has_header: bool):
    try:
        return load_csv(path, has_header=has_header)
    except FileNotFoundError:
        raise DataFormatError(f"dataset file not found: {path}")


def _mlp_config(params: dict) -> MLPConfig:
    return MLPConfig(
        hidden_units=params["hidden"],
        num_restarts=params["restarts"],
        max_epochs=params["max_epochs"],
        patience=params["patience"],
        seed=params["seed"],
    )


def _deviations(params: dict, subsampled: bool) -> list[str]:
    notes = []
    if params["restarts"] != 3:
        notes.append(f"restarts={params['restarts']} (protocol uses 3)")
    if subsampled:
        notes.append(f"online stream truncated to {params['subsample']} steps")
    return notes


@click.group()
def cli():
    """Venn prediction with a neural-network underlying classifier."""


@cli.command("inspect")
@click.option("--dataset", required=True, help="Path to the CSV dataset.")
@click.option("--has-header", is_flag=True, default=False, help="Skip the first line.")
def cmd_inspect(dataset, has_header):
    """Summarize a dataset file: example/attribute/class counts."""
    ds = _load_dataset(dataset, has_header)
    click.echo(f"{ds.n_examples} examples, {ds.n_attributes} attributes, {ds.n_classes} classes")
    click.echo("class counts:")
    for name, count in zip(ds.class_names, ds.class_counts()):
        click.echo(f"  {name}: {count}")


_shared_options = [
    click.option("--dataset", required=True, help="Path to the CSV dataset."),
    click.option("--has-header", is_flag=True, default=False, help="Skip the first line."),
    click.option("--theta", type=float, default=None, help="Taxonomy threshold (default per rule)."),
    click.option("--hidden", type=int, default=5, show_default=True, help="Hidden units."),
    click.option("--seed", type=int, default=0, show_default=True, help="Root random seed."),
    click.option("--restarts", type=int, default=3, show_default=True, help="Training restarts."),
    click.option("--max-epochs", type=int, default=200, show_default=True),
    click.option("--patience", type=int, default=20, show_default=True),
    click.option("--jobs", type=int, default=-1, show_default=True, help="Parallel workers (-1 = all cores)."),
    click.option("--out-dir", required=True, help="Directory for output files."),
    click.option("--config", "config_file", default=None, help="Replay a saved config.json (explicit flags still win)."),
]


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@cli.command("online")
@_with_options(_shared_options)
@click.option("--taxonomy", type=click.Choice(TAXONOMY_KINDS), default="v1", show_default=True)
@click.option("--baseline", is_flag=True, default=False, help="Run the plain network instead of the Venn predictor.")
@click.option("--initial-size", type=int, default=50, show_default=True)
@click.option("--subsample", type=int, default=None, help="Cap the number of prediction steps.")
@click.pass_context
def cmd_online(ctx, **params):
    """Online protocol run; writes curves.csv, summary.json, config.json."""
    _apply_config_file(ctx, params.pop("config_file"))
    params = ctx.params | {"command": "online"}
    params.pop("config_file", None)

    ds = _load_dataset(params["dataset"], params["has_header"])
    config = _mlp_config(params)
    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)

    if params["baseline"]:
        result = run_online_nn(
            ds, config, initial_size=params["initial_size"], max_steps=params["subsample"]
        )
        steps = range(1, result.n_steps + 1)
        _write_csv(
            out_dir / "curves.csv",
            ["n", "E_n", "EP_n"],
            zip(steps, (int(e) for e in result.errors), map(float, result.error_prob)),
        )
        pvalue = result.pvalue()
        final = {
            "E_N": int(result.errors[-1]),
            "EP_N": float(result.error_prob[-1]),
            "p_value": pvalue.pvalue,
            "p_value_degenerate": pvalue.degenerate,
        }
    else:
        rule = TaxonomyRule(params["taxonomy"], params["theta"])
        curves = run_online_venn(
            ds,
            [rule],
            config,
            initial_size=params["initial_size"],
            max_steps=params["subsample"],
            n_jobs=params["jobs"],
        )[rule.kind]
        result = curves
        steps = range(1, curves.n_steps + 1)
        _write_csv(
            out_dir / "curves.csv",
            ["n", "E_n", "LEP_n", "UEP_n"],
            zip(
                steps,
                (int(e) for e in curves.errors),
                map(float, curves.lower_error_prob),
                map(float, curves.upper_error_prob),
            ),
        )
        final = {
            "E_N": int(curves.errors[-1]),
            "LEP_N": float(curves.lower_error_prob[-1]),
            "UEP_N": float(curves.upper_error_prob[-1]),
            "contained": curves.contained,
        }

    summary = {
        "method": "nn" if params["baseline"] else "venn",
        "steps": result.n_steps,
        "subsampled": result.subsampled,
        "deviations": _deviations(params, result.subsampled),
        "final": final,
    }
    if not params["baseline"]:
        summary["taxonomy"] = params["taxonomy"]
    _write_json(out_dir / "summary.json", summary)
    _write_json(out_dir / _CONFIG_NAME, params)
    click.echo(f"online run complete: {result.n_steps} steps -> {out_dir}")


@cli.command("batch")
@_with_options(_shared_options)
@click.option("--taxonomy", "taxonomies", type=click.Choice(TAXONOMY_KINDS), multiple=True,
              help="Taxonomies to evaluate (repeatable; default all five).")
@click.option("--repeats", type=int, default=10, show_default=True)
@click.option("--test-fraction", type=float, default=0.10, show_default=True)
@click.option("--bins", type=int, default=100, show_default=True, help="Reliability bins.")
@click.pass_context
def cmd_batch(ctx, **params):
    """Batch comparison over repeated splits; writes metrics.json, table.txt."""
    _apply_config_file(ctx, params.pop("config_file"))
    params = ctx.params | {"command": "batch"}
    params.pop("config_file", None)
    if not params["taxonomies"]:
        params["taxonomies"] = list(TAXONOMY_KINDS)
    params["taxonomies"] = list(params["taxonomies"])

    ds = _load_dataset(params["dataset"], params["has_header"])
    rules = [TaxonomyRule(kind, params["theta"]) for kind in params["taxonomies"]]
    plan = SplitPlan(
        seed=params["seed"],
        test_fraction=params["test_fraction"],
        num_repeats=params["repeats"],
    )
    report = run_batch(
        ds, rules, _mlp_config(params), plan, n_bins=params["bins"], n_jobs=params["jobs"]
    )

    out_dir = Path(params["out_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = report.as_dict()
    payload["dataset"] = params["dataset"]
    payload["deviations"] = _deviations(params, subsampled=False)
    _write_json(out_dir / "metrics.json", payload)

    lines = [f"{'Method':<8}{'Accuracy':>10}{'CE':>10}{'BS':>9}{'REL':>9}"]
    for name, metric in report.methods.items():
        lines.append(
            f"{name.upper():<8}{metric.accuracy * 100:>9.2f}%{metric.cross_entropy:>10.2f}"
            f"{metric.brier:>9.4f}{metric.reliability:>9.4f}"
        )
    (out_dir / "table.txt").write_text("\n".join(lines) + "\n")
    _write_json(out_dir / _CONFIG_NAME, params)
    click.echo("\n".join(lines))


def main(argv=None) -> int:
    """Run the CLI, mapping failure classes to documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False, auto_envvar_prefix="VENNPREDICT")
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        return 1
    except click.UsageError as exc:
        exc.show()
        return 1
    except DataFormatError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except (TrainingFailedError, TrainingDivergedError) as exc:
        click.echo(f"training failure: {exc}", err=True)
        return 3
    return 0


def entry() -> None:
    sys.exit(main())
