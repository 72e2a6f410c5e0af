"""Command line front end.

Pipeline stages talk to each other only through files:

    synth -> grid text + legend
    vga   -> per-plan measures CSV
    prep  -> unified dataset CSV
    pca   -> model JSON + loadings CSV
    train / cluster / study -> report CSVs + model JSON
    report -> PNG figures rendered next to the CSVs

A flat key=value file passed with --config supplies defaults for any flag;
explicit flags win.  Commands with any randomness require --seed.  Exit
codes: 0 ok, 3 parse, 4 schema, 5 infeasible, 6 numeric errors.
"""

from __future__ import annotations

import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import clustering, evaluation, figures, synth, transforms
from .errors import ParseError, SchemaError, VgakitError
from .grid import read_grid, write_grid
from .ingest import (
    SUBSET8_ATTRIBUTES,
    VGA_ATTRIBUTES,
    dataset_from_records,
    measures_to_plan_records,
    read_dataset_csv,
    read_plan_csv,
    select_attributes,
    write_dataset_csv,
    write_plan_csv,
)
from .integration import ReferenceGraphKind, integration_study, reference_mean_depth
from .labels import CLASS_NAMES, CLASS_ORDER, LabelMap
from .learners import (
    EbpPruning,
    RepPruning,
    train_naive_bayes,
    train_oner,
    train_tree,
    train_zeror,
)
from .measures import compute_all_measures
from .transforms import PCAModel, bin_all_numeric, pca_fit
from .visibility import CORNER_RULE_CONSERVATIVE, CORNER_RULE_PERMISSIVE

#: Keys accepted in --config files, shared across subcommands.
CONFIG_SCHEMA: dict[str, type] = {
    "seed": int,
    "folds": int,
    "learner": str,
    "pruning": str,
    "min_leaf": int,
    "min_bucket": int,
    "confidence": float,
    "nb_mode": str,
    "bins": int,
    "preset": str,
    "variance_target": float,
    "components": int,
    "standardize": bool,
    "algo": str,
    "k": int,
    "grid": str,
    "metric": str,
    "epochs": int,
    "max_iter": int,
    "corner_rule": str,
    "jobs": int,
    "target_cells": str,
    "signal_strength": float,
    "cell_size": float,
    "label_map": str,
}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def load_config(path: str) -> dict:
    """Parse a flat key=value config file against the published schema."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected key = value")
        key, _, raw = line.partition("=")
        key = key.strip().replace("-", "_")
        raw = raw.strip()
        if key not in CONFIG_SCHEMA:
            raise SchemaError(f"{path}:{lineno}: unknown config key {key!r}")
        caster = CONFIG_SCHEMA[key]
        try:
            if caster is bool:
                if raw.lower() in _BOOL_TRUE:
                    values[key] = True
                elif raw.lower() in _BOOL_FALSE:
                    values[key] = False
                else:
                    raise ValueError(f"not a boolean: {raw!r}")
            else:
                values[key] = caster(raw)
        except ValueError as e:
            raise ParseError(f"{path}:{lineno}: {e}") from None
    return values


class AliasedGroup(click.Group):
    """Group that resolves registered command aliases."""

    aliases = {"integration-study": "study"}

    def get_command(self, ctx, cmd_name):
        return super().get_command(ctx, self.aliases.get(cmd_name, cmd_name))


@click.group(cls=AliasedGroup)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Flat key=value file with flag defaults.")
@click.pass_context
def main(ctx, config_path):
    """Visibility graph analysis and learning pipeline over floor plan grids."""
    if config_path:
        cfg = load_config(config_path)
        ctx.default_map = {cmd: cfg for cmd in main.commands}


def _run(fn):
    """Translate package errors into exit codes; click handles usage errors."""
    try:
        fn()
    except VgakitError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(e.exit_code)


@main.command()
@click.argument("grids", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", type=click.Path(file_okay=False), default=".", show_default=True)
@click.option("--corner-rule", type=click.Choice([CORNER_RULE_CONSERVATIVE, CORNER_RULE_PERMISSIVE]),
              default=CORNER_RULE_CONSERVATIVE, show_default=True,
              help="Treatment of sight lines through exact lattice corners.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Plans processed concurrently (results are identical for any value).")
def vga(grids, out_dir, corner_rule, jobs):
    """Compute the measures CSV for each grid file."""

    def work():
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)

        def one(path_str: str) -> Path:
            path = Path(path_str)
            grid = read_grid(path)
            records = compute_all_measures(grid, corner_rule=corner_rule)
            plan_records = measures_to_plan_records(records, plan_id=path.stem)
            target = out / f"{path.stem}.measures.csv"
            write_plan_csv(plan_records, target)
            return target

        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                targets = list(pool.map(one, grids))
        else:
            targets = [one(g) for g in grids]
        for t in targets:
            click.echo(str(t))

    _run(work)


@main.command()
@click.option("--kind", type=click.Choice([k.value for k in ReferenceGraphKind]), required=True)
@click.option("--k", "k_single", type=int, default=None, help="Single node count to evaluate.")
@click.option("--k-min", type=int, default=None)
@click.option("--k-max", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write a CSV sweep instead of printing.")
def reference(kind, k_single, k_min, k_max, out):
    """Reference-graph mean depths used for integration normalization."""

    def work():
        rk = ReferenceGraphKind(kind)
        if k_single is not None:
            ks = [k_single]
        elif k_min is not None and k_max is not None:
            ks = list(range(k_min, k_max + 1))
        else:
            raise SchemaError("pass --k or both --k-min and --k-max")
        rows = [(k, reference_mean_depth(rk, k)) for k in ks]
        if out:
            import csv as _csv

            with open(out, "w", newline="", encoding="utf-8") as fh:
                w = _csv.writer(fh, lineterminator="\n")
                w.writerow(["kind", "k", "reference_mean_depth"])
                for k, md in rows:
                    w.writerow([kind, k, repr(md)])
            click.echo(out)
        else:
            for k, md in rows:
                click.echo(f"{kind} k={k} reference_mean_depth={md!r}")

    _run(work)


@main.command()
@click.argument("measures", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", type=click.Path(file_okay=False), default="study", show_default=True)
def study(measures, out_dir):
    """Integration study series and summary over one or more measures CSVs."""

    def work():
        records = []
        for path in measures:
            records.extend(read_plan_csv(path))
        integration_study(records, out_dir)
        for name in sorted(p.name for p in Path(out_dir).glob("*.csv")):
            click.echo(str(Path(out_dir) / name))

    _run(work)


@main.command()
@click.argument("measures", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--preset", default="full10", show_default=True,
              help="full10, subset8, pca, or comma-separated attribute names.")
@click.option("--pca-model", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--label-map", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Override the bundled raw-label grouping table.")
def prep(measures, out, preset, pca_model, label_map):
    """Concatenate plans, group labels into classes, select attributes."""

    def work():
        records = []
        for path in measures:
            records.extend(read_plan_csv(path))
        lm = LabelMap.from_csv(label_map) if label_map else None
        ds = dataset_from_records(records, lm)
        chosen = preset if preset in ("full10", "subset8", "pca") else [
            p.strip() for p in preset.split(",") if p.strip()
        ]
        model = PCAModel.load(pca_model) if pca_model else None
        ds = select_attributes(ds, chosen, pca_model=model)
        write_dataset_csv(ds, out)
        click.echo(out)

    _run(work)


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Model JSON path.")
@click.option("--report", type=click.Path(dir_okay=False), default=None,
              help="Loadings and variance shares CSV.")
@click.option("--variance-target", type=float, default=None)
@click.option("--components", type=int, default=None)
@click.option("--standardize", is_flag=True, default=False)
def pca(dataset, out, report, variance_target, components, standardize):
    """Fit principal components on a dataset file."""

    def work():
        ds = read_dataset_csv(dataset)
        model = pca_fit(ds, variance_target=variance_target, component_count=components,
                        standardize=standardize)
        model.save(out)
        click.echo(f"{out} ({model.retained} components, "
                   f"{100.0 * model.variance_shares.sum():.2f}% of variance, "
                   f"covariance={'standardized' if standardize else 'raw'})")
        if report:
            import csv as _csv

            with open(report, "w", newline="", encoding="utf-8") as fh:
                w = _csv.writer(fh, lineterminator="\n")
                w.writerow(["attribute"] + [f"v{i+1}" for i in range(model.retained)])
                for j, name in enumerate(model.attribute_names):
                    w.writerow([name] + [f"{model.components[i][j]:.4f}" for i in range(model.retained)])
                w.writerow(["variance_share"] + [f"{s:.6f}" for s in model.variance_shares])
            click.echo(report)

    _run(work)


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--learner", type=click.Choice(["zeror", "oner", "nb", "tree"]), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="train-report", show_default=True)
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--pruning", type=click.Choice(["none", "rep", "ebp"]), default="none", show_default=True)
@click.option("--min-leaf", type=int, default=50, show_default=True)
@click.option("--confidence", type=float, default=0.25, show_default=True)
@click.option("--min-bucket", type=int, default=6, show_default=True)
@click.option("--nb-mode", type=click.Choice(["gaussian", "prebinned"]), default="gaussian",
              show_default=True)
@click.option("--bins", type=int, default=10, show_default=True)
@click.option("--gain-ratio", is_flag=True, default=False)
@click.option("--dump-rules", is_flag=True, default=False, help="Print OneR rules (oner only).")
def train(dataset, learner, out_dir, folds, seed, pruning, min_leaf, confidence, min_bucket,
          nb_mode, bins, gain_ratio, dump_rules):
    """Cross-validate a learner and write its report and fitted model."""

    def work():
        ds = read_dataset_csv(dataset)
        metadata = {"learner": learner, "seed": seed, "folds": folds}
        if learner == "nb" and nb_mode == "prebinned":
            ds, _ = bin_all_numeric(ds, bins)
            metadata["bins"] = bins

        if learner == "zeror":
            train_fn = train_zeror
        elif learner == "oner":
            metadata["min_bucket"] = min_bucket

            def train_fn(sub):
                return train_oner(sub, min_bucket=min_bucket)
        elif learner == "nb":
            metadata["nb_mode"] = nb_mode

            def train_fn(sub):
                return train_naive_bayes(sub, mode="gaussian" if nb_mode == "gaussian" else "prebinned-nominal")
        else:
            metadata.update({"pruning": pruning, "min_leaf": min_leaf,
                             "criterion": "gain_ratio" if gain_ratio else "information_gain"})
            if pruning == "ebp":
                metadata["confidence"] = confidence

            def train_fn(sub):
                cfg = None
                if pruning == "rep":
                    cfg = RepPruning(folds=3, seed=seed)
                elif pruning == "ebp":
                    cfg = EbpPruning(confidence=confidence)
                return train_tree(sub, min_leaf=min_leaf, pruning=cfg, use_gain_ratio=gain_ratio)

        plan = evaluation.stratified_folds(ds.y, k=folds, seed=seed)
        report = evaluation.cross_validate(train_fn, ds, plan, metadata)
        paths = evaluation.export_report(report, out_dir)
        model = train_fn(ds)
        model_path = Path(out_dir) / "model.json"
        model_path.write_text(model.to_json(), encoding="utf-8")
        if dump_rules and learner == "oner":
            for line in model.rule_lines():
                click.echo(line)
        click.echo(f"accuracy: {report.accuracy_text}")
        for p in paths + [model_path]:
            click.echo(str(p))

    _run(work)


@main.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--algo", type=click.Choice(["kmeans", "som"]), required=True)
@click.option("--k", type=int, default=12, show_default=True, help="Cluster count (kmeans).")
@click.option("--grid", "grid_dims", default="4x3", show_default=True, help="SOM lattice WxH.")
@click.option("--metric", type=click.Choice([clustering.EUCLIDEAN, clustering.MANHATTAN]),
              default=clustering.EUCLIDEAN, show_default=True)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--max-iter", type=int, default=100, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--classes-to-clusters", is_flag=True, default=False,
              help="Evaluate clusters against the class column.")
@click.option("--standardize/--no-standardize", default=True, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="cluster-report",
              show_default=True)
def cluster(dataset, algo, k, grid_dims, metric, epochs, max_iter, seed, classes_to_clusters,
            standardize, out_dir):
    """Cluster a dataset with k-means or a self-organizing map."""

    def work():
        import csv as _csv

        ds = read_dataset_csv(dataset)
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if algo == "kmeans":
            model = clustering.kmeans_fit(ds, k=k, metric=metric, seed=seed,
                                          max_iter=max_iter, standardize=standardize)
            assignments = model.assign(ds.X)
            n_clusters = model.k
            meta = {"algo": "kmeans", "k": k, "metric": metric, "seed": seed,
                    "iterations": model.iterations,
                    "within_distance_sum": f"{model.within_distance_sum:.6f}"}
        else:
            try:
                wtxt, htxt = grid_dims.lower().split("x")
                width, height = int(wtxt), int(htxt)
            except ValueError:
                raise SchemaError(f"--grid must look like 12x8, got {grid_dims!r}") from None
            model = clustering.som_fit(ds, width=width, height=height, epochs=epochs,
                                       seed=seed, standardize=standardize)
            assignments = model.map_batch(ds.X)
            n_clusters = width * height
            meta = {"algo": "som", "grid": f"{width}x{height}", "epochs": epochs, "seed": seed,
                    "qe_initial": f"{model.quantization_error_initial:.6f}",
                    "qe_final": f"{model.quantization_error_final:.6f}"}
        meta["standardized"] = standardize

        (out / "model.json").write_text(model.to_json(), encoding="utf-8")
        with open(out / "assignments.csv", "w", newline="", encoding="utf-8") as fh:
            w = _csv.writer(fh, lineterminator="\n")
            w.writerow(["instance", "cluster"])
            for i, c in enumerate(assignments):
                w.writerow([i, int(c)])

        if classes_to_clusters:
            mapping, accuracy, matrix, table = clustering.classes_to_clusters(
                assignments, ds.y, n_clusters
            )
            meta["classes_to_clusters_accuracy_percent"] = f"{100.0 * accuracy:.4f}"
            with open(out / "cluster_table.csv", "w", newline="", encoding="utf-8") as fh:
                w = _csv.writer(fh, lineterminator="\n")
                w.writerow(["class"] + [f"cluster_{c}" for c in range(n_clusters)])
                for i, name in enumerate(CLASS_NAMES):
                    w.writerow([name] + [int(v) for v in table[i]])
            evaluation.write_confusion_csv(matrix, out / "confusion.csv")
            evaluation.write_heatmap_csv(matrix, out / "heatmap.csv")
            with open(out / "cluster_classes.csv", "w", newline="", encoding="utf-8") as fh:
                w = _csv.writer(fh, lineterminator="\n")
                w.writerow(["cluster", "class"])
                for c, cls in enumerate(mapping):
                    w.writerow([c, CLASS_ORDER[cls].name])
            click.echo(f"classes-to-clusters accuracy: {100.0 * accuracy:.4f} %")

        with open(out / "summary.csv", "w", newline="", encoding="utf-8") as fh:
            w = _csv.writer(fh, lineterminator="\n")
            w.writerow(["key", "value"])
            for key in sorted(meta):
                w.writerow([key, meta[key]])
        for p in sorted(out.glob("*")):
            click.echo(str(p))

    _run(work)


@main.command()
@click.option("--seed", type=int, required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default="synthetic", show_default=True)
@click.option("--target-cells", default="500,1500,4000,8000,14000,20000", show_default=True,
              help="Comma-separated open-cell counts, one layout each.")
@click.option("--signal-strength", type=float, default=None,
              help="Plant a depth-quantile usage signal with this strength.")
@click.option("--cell-size", type=float, default=0.45, show_default=True)
def synth_cmd(seed, out_dir, target_cells, signal_strength, cell_size):
    """Generate a corpus of synthetic office layouts."""

    def work():
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        try:
            sizes = [int(s) for s in target_cells.split(",") if s.strip()]
        except ValueError:
            raise ParseError(f"--target-cells must be comma-separated integers, got {target_cells!r}") from None
        for i, size in enumerate(sizes):
            grid = synth.generate_office(seed + i, target_cells=size, cell_size=cell_size)
            if signal_strength is not None:
                grid = synth.plant_geometry_signal(grid, signal_strength, seed=seed + i)
            path = out / f"office_{i:02d}.grid"
            write_grid(grid, path)
            click.echo(f"{path} ({grid.node_count()} open cells)")

    _run(work)


# registered under the pipeline name
main.add_command(synth_cmd, name="synth")


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def report(directory):
    """Render figures (PNG) for every report CSV found in a directory."""

    def work():
        produced = figures.render_report_directory(directory)
        if not produced:
            raise SchemaError(f"{directory}: no report CSVs recognized")
        for p in produced:
            click.echo(str(p))

    _run(work)


if __name__ == "__main__":
    main()
