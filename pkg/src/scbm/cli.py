"""Command-line entry point wiring all pipeline stages.

A run directory holds a copy of the config plus every emitted artifact.
All output files are written atomically (temp file then rename) and contain
no timestamps, so identical (config, inputs) give byte-identical runs.
"""

from __future__ import annotations

import dataclasses
import json
import os
import shutil
import time
import zlib
from contextlib import contextmanager

import click
import numpy as np

from . import __version__
from .config import PipelineConfig, parse_config
from .core import EmbeddingMatrix
from .embedding import SyntheticEmbedder, planted_spec, read_embeddings, write_embeddings
from .errors import ConfigError, ScbmError
from .evaluation import (
    Protocol,
    ScenarioResult,
    delta_csv,
    delta_report,
    evaluate_scenario,
    make_dls_splits,
    make_random_splits,
    results_csv,
    subject_miss_csv,
    subject_miss_report,
)
from .forest import MetricsReport, RfConfig
from .ingestion import (
    DEFAULT_VALID_STATUSES,
    coverage_gate,
    duration_breakdown,
    exposure_stats,
    filter_scenario_samples,
    load_clips,
    load_segments,
    load_subjects,
    load_trips,
)
from .ranking import DistanceSpace, rank_scenarios
from .reduction import pca_fit, pca_transform
from .synth import default_spec, demo_spec, generate_cohort


@contextmanager
def _atomic(path):
    tmp = str(path) + ".tmp"
    yield tmp
    os.replace(tmp, path)


def _load_cfg(config_path, seed) -> PipelineConfig:
    cfg = parse_config(config_path)
    if seed is not None:
        cfg = dataclasses.replace(cfg, seed=seed)
    return cfg


def _run_dir(out, cfg) -> str:
    if out is None:
        out = os.path.join("runs", f"{time.strftime('%Y%m%d-%H%M%S')}-{cfg.seed}")
    os.makedirs(out, exist_ok=True)
    return out


def _copy_config(config_path, out_dir):
    dest = os.path.join(out_dir, "config.txt")
    if os.path.abspath(config_path) != os.path.abspath(dest):
        shutil.copyfile(config_path, dest)


def _cohort_spec(cfg: PipelineConfig):
    return default_spec(cfg.seed) if cfg.cohort == "default" else demo_spec(cfg.seed)


def _load_data(data_dir):
    segments = load_segments(os.path.join(data_dir, "segments.csv"))
    subjects = load_subjects(os.path.join(data_dir, "subjects.csv"))
    trips = load_trips(os.path.join(data_dir, "trips.csv"), segments, subjects)
    clips = load_clips(os.path.join(data_dir, "clips.csv"), segments, subjects)
    return segments, subjects, trips, clips


def _embed_scenarios(cfg, data_dir, out_dir, scenario_filter=None):
    """Synthetic embedding per scenario; needs ledger.json for the planted
    class model."""
    ledger_path = os.path.join(data_dir, "ledger.json")
    if not os.path.exists(ledger_path):
        raise ConfigError(
            f"{data_dir}: no ledger.json; synthetic embedding needs a generated "
            "cohort (real embeddings arrive as .sbem files instead)"
        )
    with open(ledger_path, encoding="utf-8") as fh:
        ledger = json.load(fh)
    segments, subjects, trips, clips = _load_data(data_dir)

    retained = coverage_gate(subjects, trips, cfg.min_fraction, segments)
    clips = [c for c in clips if c.subject in retained]

    deltas = {name: s["delta"] for name, s in ledger["scenarios"].items()}
    sigmas = {s["sigma"] for s in ledger["scenarios"].values()}
    spec = planted_spec(cfg.m, deltas, sigma=sigmas.pop(), seed=ledger["seed"])
    embedder = SyntheticEmbedder(spec)
    labels = {sid: s.binary for sid, s in subjects.items()}

    emb_dir = os.path.join(out_dir, "emb")
    os.makedirs(emb_dir, exist_ok=True)
    scenarios = sorted(ledger["scenarios"])
    if scenario_filter:
        scenarios = [s for s in scenarios if s == scenario_filter]
    for name in scenarios:
        scen_clips = filter_scenario_samples(
            clips, name, DEFAULT_VALID_STATUSES, scenarios=ledger["scenarios"]
        )
        matrix = embedder.embed_all(scen_clips, labels)
        path = os.path.join(emb_dir, f"{name}.sbem")
        write_embeddings(matrix, path)
    return subjects


def _read_matrices(out_dir, sub) -> dict[str, EmbeddingMatrix]:
    d = os.path.join(out_dir, sub)
    out = {}
    for fname in sorted(os.listdir(d)):
        if fname.endswith(".sbem"):
            out[fname[: -len(".sbem")]] = read_embeddings(os.path.join(d, fname))
    return out


def _reduce_all(cfg, out_dir):
    red_dir = os.path.join(out_dir, "reduced")
    os.makedirs(red_dir, exist_ok=True)
    for name, matrix in _read_matrices(out_dir, "emb").items():
        model = pca_fit(matrix, cfg.n)
        reduced = pca_transform(model, matrix)
        reduced = EmbeddingMatrix(reduced.keys, reduced.vectors.astype(np.float32))
        write_embeddings(reduced, os.path.join(red_dir, f"{name}.sbem"))


def _rank(cfg, out_dir):
    sub = "reduced" if cfg.space is DistanceSpace.REDUCED else "emb"
    matrices = _read_matrices(out_dir, sub)
    result = rank_scenarios(matrices, cfg.metric, cfg.space)
    with _atomic(os.path.join(out_dir, "ranking.csv")) as tmp:
        result.to_csv(tmp)
    return result


def _rf_config(cfg: PipelineConfig, scenario: str) -> RfConfig:
    scen_seed = (cfg.seed * 1000003 + zlib.crc32(scenario.encode())) % (2**63)
    return RfConfig(
        n_trees=cfg.rf_trees,
        max_features=cfg.rf_max_features,
        max_depth=cfg.rf_max_depth,
        min_leaf=cfg.rf_min_leaf,
        seed=scen_seed,
    )


def _evaluate_all(cfg, out_dir):
    sub = "reduced" if cfg.classifier_space is DistanceSpace.REDUCED else "emb"
    matrices = _read_matrices(out_dir, sub)
    results = {}
    for name, matrix in sorted(matrices.items()):
        split_seed = [cfg.seed, zlib.crc32(name.encode())]
        random_plans = make_random_splits(len(matrix), cfg.test_fraction, split_seed, cfg.resamples)
        dls_plans = make_dls_splits(matrix.keys, cfg.k, cfg.r, split_seed)
        rf_cfg = _rf_config(cfg, name)
        results[name] = {
            "random": evaluate_scenario(matrix, random_plans, rf_cfg, scenario=name),
            "dls": evaluate_scenario(matrix, dls_plans, rf_cfg, scenario=name),
        }
    _dump_results(results, os.path.join(out_dir, "results.json"))
    return results


def _dump_results(results, path):
    obj = {}
    for name, by_proto in results.items():
        obj[name] = {}
        for proto, res in by_proto.items():
            obj[name][proto] = {
                "per_run": [
                    {"tp": m.tp, "fp": m.fp, "fn": m.fn, "tn": m.tn} for m in res.per_run
                ],
                "subject_counts": res.subject_counts,
            }
    with _atomic(path) as tmp:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _load_results(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    results = {}
    for name, by_proto in obj.items():
        results[name] = {}
        for proto, data in by_proto.items():
            results[name][proto] = ScenarioResult(
                scenario=name,
                protocol=Protocol.RANDOM if proto == "random" else Protocol.DLS,
                per_run=[MetricsReport(**m) for m in data["per_run"]],
                subject_counts={k: list(v) for k, v in data["subject_counts"].items()},
            )
    return results


def _report(out_dir, subjects, ranking=None):
    results = _load_results(os.path.join(out_dir, "results.json"))
    order = [e.scenario for e in ranking.entries] if ranking else sorted(results)
    flat = [results[name][proto] for name in order for proto in ("random", "dls")]
    with _atomic(os.path.join(out_dir, "results.csv")) as tmp:
        results_csv(flat, tmp)
    if len(order) >= 2:
        a, b = order[0], order[1]
        d_random = delta_report(results[a]["random"], results[b]["random"])
        d_dls = delta_report(results[a]["dls"], results[b]["dls"])
        with _atomic(os.path.join(out_dir, "delta.csv")) as tmp:
            delta_csv(d_random, d_dls, tmp)
    miss = subject_miss_report([results[name]["random"] for name in order], subjects)
    with _atomic(os.path.join(out_dir, "subject_miss.csv")) as tmp:
        subject_miss_csv(miss, tmp)
    return results


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--out", default=None, type=click.Path())(fn)
    fn = click.option("--seed", default=None, type=int, help="Overrides the config seed.")(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main():
    """Scenario-based driving-video cognitive classification pipeline."""


@main.command("synth")
@_common_options
def cmd_synth(config_path, out, seed):
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    _copy_config(config_path, out_dir)
    ledger = generate_cohort(_cohort_spec(cfg), os.path.join(out_dir, "data"))
    click.echo(f"cohort written to {out_dir}/data ({sum(ledger['subjects']['binary'].values())} subjects)")


@main.command("ingest")
@_common_options
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
def cmd_ingest(config_path, out, seed, data_dir):
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    segments, subjects, trips, clips = _load_data(data_dir)
    stats = exposure_stats(trips, subjects, segments)
    bd = duration_breakdown(clips)
    with _atomic(os.path.join(out_dir, "exposure.csv")) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write("scenario,n_u,m_u,a_u,t_u,t_bar_u,t_avg\n")
            for name in sorted(stats):
                s = stats[name]
                fh.write(f"{name},{s.n_u},{s.m_u},{s.a_u},{s.t_u},{s.t_bar_u},{s.t_avg!r}\n")
    click.echo(
        f"{len(segments)} segments, {len(subjects)} subjects, {len(trips)} trips, "
        f"{len(clips)} clips; valid footage {bd.valid_min:.1f} of {bd.total_min:.1f} min"
    )


@main.command("embed")
@_common_options
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
@click.option("--scenario", default=None)
def cmd_embed(config_path, out, seed, data_dir, scenario):
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    _embed_scenarios(cfg, data_dir, out_dir, scenario)
    click.echo(f"embeddings written to {out_dir}/emb")


@main.command("reduce")
@_common_options
def cmd_reduce(config_path, out, seed):
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    _reduce_all(cfg, out_dir)
    click.echo(f"reduced embeddings written to {out_dir}/reduced")


@main.command("rank")
@_common_options
def cmd_rank(config_path, out, seed):
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    result = _rank(cfg, out_dir)
    for rank, e in enumerate(result.entries, start=1):
        click.echo(f"{rank}. {e.scenario}  dist_avg={e.dist_avg:.6f}")


@main.command("evaluate")
@_common_options
def cmd_evaluate(config_path, out, seed):
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    _evaluate_all(cfg, out_dir)
    click.echo(f"evaluation results written to {out_dir}/results.json")


@main.command("report")
@_common_options
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True))
def cmd_report(config_path, out, seed, data_dir):
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    subjects = load_subjects(os.path.join(data_dir, "subjects.csv"))
    _report(out_dir, subjects)
    click.echo(f"results.csv, delta.csv, subject_miss.csv written to {out_dir}")


@main.command("pipeline")
@_common_options
@click.option("--data", "data_dir", default=None, type=click.Path(exists=True),
              help="Existing cohort directory; generated per config when omitted.")
def cmd_pipeline(config_path, out, seed, data_dir):
    """End-to-end run: embed per scenario, reduce, rank, pick the most
    discriminative scenario, evaluate under both protocols, report."""
    cfg = _load_cfg(config_path, seed)
    out_dir = _run_dir(out, cfg)
    _copy_config(config_path, out_dir)
    if data_dir is None:
        data_dir = os.path.join(out_dir, "data")
        generate_cohort(_cohort_spec(cfg), data_dir)
    subjects = _embed_scenarios(cfg, data_dir, out_dir)
    _reduce_all(cfg, out_dir)
    ranking = _rank(cfg, out_dir)
    _evaluate_all(cfg, out_dir)
    results = _report(out_dir, subjects, ranking)

    click.echo("scenario ranking:")
    for rank, e in enumerate(ranking.entries, start=1):
        click.echo(f"  {rank}. {e.scenario}  dist_avg={e.dist_avg:.6f}")
    best = ranking.best
    click.echo(f"most discriminative scenario: {best}")
    for proto in ("random", "dls"):
        res = results[best][proto]
        click.echo(
            f"  {proto}: a={res.mean('a'):.4f} P={res.mean('P'):.4f} "
            f"R={res.mean('R'):.4f} F1={res.mean('F1'):.4f}"
        )


def run():
    try:
        main(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        raise SystemExit(2)
    except click.exceptions.Abort:
        raise SystemExit(130)
    except ScbmError as exc:
        click.echo(f"error[{type(exc).__name__}]: {exc}", err=True)
        raise SystemExit(1)


if __name__ == "__main__":
    run()
