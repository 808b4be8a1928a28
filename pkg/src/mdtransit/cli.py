"""Batch CLI: analyze (load -> reduce -> cluster -> export), report
(scratchpad export), serve (local HTTP service)."""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .engine import Engine
from .ingest import dataset_content_hash, load_dataset
from .model import LoadError, ValidationError
from .session import export_all, export_scratchpad, load_session


@click.group()
def main():
    """Transition-ensemble analysis for molecular dynamics simulations."""


def _load(manifest: str, bond_cutoff: float | None):
    try:
        dataset = load_dataset(manifest)
    except LoadError as e:
        click.echo(f"error [load]: {e}", err=True)
        sys.exit(2)
    except ValidationError as e:
        click.echo(f"error [validate]: {e}", err=True)
        sys.exit(2)
    if bond_cutoff is not None:
        dataset.bond_cutoff = bond_cutoff
    return dataset


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--reduction-cutoff", default=1.0, show_default=True, type=float)
@click.option("--cluster-cutoff", default=0.0, show_default=True, type=float)
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--bond-cutoff", default=None, type=float)
@click.option("--cache-dir", default=None, type=click.Path())
def analyze(manifest, reduction_cutoff, cluster_cutoff, out_dir, bond_cutoff, cache_dir):
    """Run the batch pipeline and export the clustered hierarchy."""
    dataset = _load(manifest, bond_cutoff)
    engine = Engine(dataset, cache_dir=cache_dir)
    stage = "descriptors"
    try:
        engine.compute_descriptors()
        stage = "distance-matrix"
        engine.compute_distances()
        stage = "reduction"
        engine.set_reduction(reduction_cutoff)
        stage = "clustering"
        engine.set_cluster_cutoff(cluster_cutoff)
        clusters = engine.flat_clusters()
        stage = "export"
        export_all(
            engine.session,
            dataset,
            engine.require_tree(),
            engine.reduction.reduced.labels,
            Path(out_dir),
            removed=engine.reduction.removed,
        )
    except (ValidationError, OSError) as e:
        click.echo(f"error [{stage}]: {e}", err=True)
        sys.exit(1)

    kept = len(engine.reduction.kept)
    total = dataset.n_transitions
    click.echo(f"transitions in: {total}")
    click.echo(f"kept after reduction (cutoff {reduction_cutoff}): "
               f"{kept} ({100.0 * kept / total:.1f}%)")
    click.echo(f"clusters at cutoff {cluster_cutoff}: {len(clusters)}")
    for t in engine.summary.timings:
        click.echo(f"  {t.name}: {t.seconds:.2f}s")
    click.echo(f"exported to {out_dir}")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--session", "session_file", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
def report(manifest, session_file, out_dir):
    """Export the scratchpad of a saved session as folders plus HTML report."""
    dataset = _load(manifest, None)
    try:
        session, stale = load_session(
            session_file, dataset, dataset_content_hash(dataset)
        )
    except ValidationError as e:
        click.echo(f"error [session]: {e}", err=True)
        sys.exit(1)
    if stale.hash_mismatch:
        click.echo("warning: session was saved against a different dataset", err=True)
    for ref in stale.dropped_refs:
        click.echo(f"warning: dropped stale reference {ref}", err=True)
    try:
        export_scratchpad(session, dataset, Path(out_dir))
    except OSError as e:
        click.echo(f"error [export]: {e}", err=True)
        sys.exit(1)
    click.echo(f"report written to {out_dir}")


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--port", default=8765, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--reduction-cutoff", default=1.0, show_default=True, type=float)
@click.option("--bond-cutoff", default=None, type=float)
@click.option("--cache-dir", default=None, type=click.Path())
def serve(manifest, port, host, reduction_cutoff, bond_cutoff, cache_dir):
    """Serve the analysis engine over HTTP/JSON for the explorer UI."""
    import uvicorn

    from .service import create_app

    dataset = _load(manifest, bond_cutoff)
    engine = Engine(dataset, cache_dir=cache_dir)
    engine.session.reduction_cutoff = reduction_cutoff
    app = create_app(engine)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
