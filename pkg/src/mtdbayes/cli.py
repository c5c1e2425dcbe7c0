"""Batch command-line interface.

Commands: ``discretize``, ``simulate``, ``fit``, ``evaluate``, ``summarize``,
plus ``replay`` to re-run any command from its manifest.  Every command
writes a ``manifest.json`` capturing the resolved arguments, configuration,
input hashes, and outputs; re-running with the same manifest reproduces the
output files byte for byte (the manifest's own timestamp aside).

States are 1-based in every CSV (header ``state``); the library is 0-based
internally and the boundary is fixed here.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import warnings
from dataclasses import asdict, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .discretize import discretize_series
from .inference import McmcConfig, lag_history_matrix, run_mcmc
from .mmtd import matricize, unmatricize
from .postprocess import (
    INTERCEPT_CAVEAT,
    l1_loss,
    lag_inclusion,
    log_predictive_score,
    posterior_mean_q,
    predict_transition_batch,
    q_redundancy,
    summarize,
)
from .profiles import PROFILE_NAMES, make_profile
from .samples_io import load_samples, model_to_dict, save_samples
from .simulate import ScenarioSpec, make_scenario_data
from .inference import MmtdModel, MtdgModel, MtdModel

CONFIG_SCHEMA_VERSION = 1
_MODEL_KEYS = {"profile", "n_states", "n_lags", "max_order", "delta_scale"}
_MCMC_KEYS = {f.name for f in fields(McmcConfig)}


class CliError(SystemExit):
    def __init__(self, message: str):
        print(f"error: {message}", file=sys.stderr)
        super().__init__(2)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_manifest(outdir: Path, command: str, argv: list[str], **extra) -> Path:
    doc = {
        "command": command,
        "argv": argv,
        "package_version": __version__,
        "created_utc": _utcnow(),
    }
    doc.update(extra)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(doc, indent=2, default=float))
    return path


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def read_numeric_csv(path: Path) -> np.ndarray:
    """Single numeric column; a non-numeric first row is treated as a header.
    Every other non-numeric or empty row is an ingestion error, reported with
    its 1-based row number."""
    lines = path.read_text().splitlines()
    if not lines:
        raise CliError(f"{path}: empty input file")
    values = []
    bad = []
    start = 0
    try:
        float(lines[0].split(",")[0])
    except ValueError:
        start = 1
    for i, line in enumerate(lines[start:], start=start + 1):
        cell = line.split(",")[0].strip()
        try:
            values.append(float(cell))
        except ValueError:
            bad.append(i)
    if bad:
        raise CliError(f"{path}: non-numeric or missing values at rows {bad}")
    if not values:
        raise CliError(f"{path}: no data rows")
    return np.array(values)


def read_state_csv(path: Path, n_states: int | None = None) -> np.ndarray:
    """Integer states (1-based on disk), returned 0-based."""
    raw = read_numeric_csv(path)
    states = raw.astype(np.int64)
    if np.any(states != raw):
        raise CliError(f"{path}: states must be integers")
    if np.any(states < 1):
        raise CliError(f"{path}: states are 1-based; found values below 1")
    if n_states is not None and np.any(states > n_states):
        raise CliError(f"{path}: found states above the declared count {n_states}")
    return states - 1


def write_state_csv(path: Path, states0: np.ndarray) -> None:
    pd.DataFrame({"state": states0 + 1}).to_csv(path, index=False)


# ---------------------------------------------------------------------------
# Config handling (fail-closed)
# ---------------------------------------------------------------------------

def _check_keys(doc: dict, allowed: set[str], where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise CliError(f"unknown {where} keys: {sorted(unknown)}")


def load_config(path: Path | None) -> dict:
    if path is None:
        return {"model": {}, "mcmc": {}}
    doc = json.loads(Path(path).read_text())
    _check_keys(doc, {"schema_version", "model", "mcmc"}, "config")
    if doc.get("schema_version", CONFIG_SCHEMA_VERSION) != CONFIG_SCHEMA_VERSION:
        raise CliError(f"unsupported config schema_version {doc.get('schema_version')}")
    model = doc.get("model", {})
    mcmc = doc.get("mcmc", {})
    _check_keys(model, _MODEL_KEYS, "config.model")
    _check_keys(mcmc, _MCMC_KEYS, "config.mcmc")
    return {"model": model, "mcmc": mcmc}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_discretize(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    values = read_numeric_csv(Path(args.input))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        states, edges = discretize_series(values, args.bins)
    for w in caught:
        print(f"warning: {w.message}")
    out_csv = outdir / "states.csv"
    write_state_csv(out_csv, states)
    write_manifest(
        outdir,
        "discretize",
        args.argv,
        input_sha256=_sha256(Path(args.input)),
        n_bins=args.bins,
        bin_edges=edges.tolist(),
        outputs=[out_csv.name],
    )
    print(f"wrote {out_csv} ({states.size} states, {args.bins} bins)")
    return 0


def cmd_simulate(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = ScenarioSpec.from_json(Path(args.scenario).read_text())
    if args.seed is not None:
        spec.seed = args.seed
    sim = make_scenario_data(spec)
    context = args.context if args.context is not None else spec.n_lags
    train_csv = outdir / "train.csv"
    valid_csv = outdir / "valid.csv"
    truth_json = outdir / "truth.json"
    sidecar = outdir / "series.json"
    write_state_csv(train_csv, sim.train)
    write_state_csv(valid_csv, sim.stitched(context))
    truth_json.write_text(
        json.dumps(
            {
                "n_states": spec.n_states,
                "active_lags": list(spec.active_lags),
                "tensor": sim.truth.tolist(),
            },
            indent=2,
        )
    )
    sidecar.write_text(
        json.dumps(
            {
                "n_states": spec.n_states,
                "max_lag": spec.n_lags,
                "seed": spec.seed,
                "train_len": spec.train_len,
                "valid_len": spec.valid_len,
                "valid_context": context,
                "truth": truth_json.name,
            },
            indent=2,
        )
    )
    write_manifest(
        outdir,
        "simulate",
        args.argv,
        scenario=json.loads(spec.to_json()),
        valid_context=context,
        outputs=[train_csv.name, valid_csv.name, truth_json.name, sidecar.name],
    )
    print(f"wrote {train_csv}, {valid_csv} (context {context}), {truth_json}")
    return 0


def _resolve_model(args, cfg_model: dict, train_len: int):
    profile = args.profile or cfg_model.get("profile")
    if profile is None:
        raise CliError("no model profile given (flag --profile or config.model.profile)")
    if profile not in PROFILE_NAMES:
        raise CliError(f"unknown profile {profile!r}; choose one of {PROFILE_NAMES}")
    n_states = args.states or cfg_model.get("n_states")
    n_lags = args.lags or cfg_model.get("n_lags")
    if n_states is None or n_lags is None:
        raise CliError("model needs n_states and n_lags (flags --states/--lags or config.model)")
    max_order = args.order or cfg_model.get("max_order")
    return profile, make_profile(
        profile,
        n_states=n_states,
        n_lags=n_lags,
        max_order=max_order,
        train_len=train_len,
        delta_scale=cfg_model.get("delta_scale", 1.0),
    )


def cmd_fit(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = load_config(Path(args.config) if args.config else None)
    mcmc_kw = dict(cfg["mcmc"])
    if args.paper_scale:
        mcmc_kw.setdefault("n_burn", 200_000)
        mcmc_kw.setdefault("n_keep", 400_000)
        mcmc_kw.setdefault("thin", 200)
    if args.seed is not None:
        mcmc_kw["seed"] = args.seed
    if args.chains is not None:
        mcmc_kw["n_chains"] = args.chains
    config = McmcConfig(**mcmc_kw)
    data_path = Path(args.data)
    n_states_declared = args.states or cfg["model"].get("n_states")
    data = read_state_csv(data_path, n_states_declared)
    profile, model = _resolve_model(args, cfg["model"], train_len=data.size)
    if np.any(data >= model.n_states):
        raise CliError(f"{data_path}: states exceed the declared count {model.n_states}")
    try:
        samples = run_mcmc(model, data, config)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    written = save_samples(samples, outdir)
    write_manifest(
        outdir,
        "fit",
        args.argv,
        profile=profile,
        model=model_to_dict(model),
        mcmc=asdict(config),
        train_len=int(data.size),
        data_sha256=_sha256(data_path),
        chain_seconds=samples.diagnostics.get("chain_seconds"),
        outputs=[p.name for p in written],
    )
    rate = samples.swap_acceptance_rate()
    print(
        f"fit {profile}: {config.n_chains} chains x {samples.n_kept} kept draws; "
        f"max rhat {samples.diagnostics['max_rhat']:.3f}; "
        f"swap acceptance {rate if np.isnan(rate) else round(rate, 4)}"
    )
    return 0


def _truth_probs_at(valid: np.ndarray, truth_doc: dict, offset: int) -> np.ndarray:
    tensor = np.asarray(truth_doc["tensor"], dtype=np.float64)
    active = [int(l) for l in truth_doc["active_lags"]]
    cols = matricize(tensor)
    k = tensor.shape[0]
    hist = lag_history_matrix(valid, offset)
    sel = hist[:, np.array(active) - 1]
    powers = k ** np.arange(len(active), dtype=np.int64)
    return cols[:, sel @ powers].T


def cmd_evaluate(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    samples = load_samples(Path(args.samples))
    model = samples.model
    valid = read_state_csv(Path(args.data), model.n_states)
    rows = []
    if args.truth:
        truth_doc = json.loads(Path(args.truth).read_text())
        max_active = max(truth_doc["active_lags"])
        offset = max(model.n_lags, max_active)
        if valid.size <= offset:
            raise CliError("validation series shorter than the required history context")
        hist = lag_history_matrix(valid, offset)
        estimates = predict_transition_batch(samples, hist[:, :model.n_lags])
        truth_probs = _truth_probs_at(valid, truth_doc, offset)
        rows.append(
            {
                "metric": "l1_loss",
                "value": l1_loss(estimates, truth_probs),
                "n_points": valid.size - offset,
            }
        )
    else:
        if valid.size <= model.n_lags:
            raise CliError("validation series shorter than the required history context")
        rows.append(
            {
                "metric": "log_predictive",
                "value": log_predictive_score(samples, valid),
                "n_points": valid.size - model.n_lags,
            }
        )
    out_csv = outdir / "scores.csv"
    pd.DataFrame(rows).to_csv(out_csv, index=False)
    write_manifest(
        outdir,
        "evaluate",
        args.argv,
        samples_dir=str(args.samples),
        data_sha256=_sha256(Path(args.data)),
        truth=bool(args.truth),
        outputs=[out_csv.name],
    )
    print(out_csv.read_text().strip())
    return 0


def _validate_chain_csvs(indir: Path, samples) -> None:
    for chain in range(samples.n_chains):
        path = indir / f"chain_{chain}.csv"
        if not path.exists():
            continue
        try:
            table = pd.read_csv(path)
        except Exception as exc:
            raise CliError(f"corrupted sample file {path}: {exc}") from exc
        if len(table) != samples.n_kept:
            raise CliError(
                f"corrupted sample file {path}: expected {samples.n_kept} kept "
                f"iterations, found {len(table)}"
            )


def cmd_summarize(args) -> int:
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    indir = Path(args.samples)
    samples = load_samples(indir)
    if samples.n_kept == 0:
        raise CliError(f"{indir}: sample file holds no kept draws")
    _validate_chain_csvs(indir, samples)

    weights_csv = outdir / "weights.csv"
    summarize(samples).to_csv(weights_csv, index=False)

    _, inclusion = lag_inclusion(samples)
    inclusion_csv = outdir / "inclusion.csv"
    with inclusion_csv.open("w") as fh:
        fh.write(f"# note: {INTERCEPT_CAVEAT}\n")
        inclusion.to_csv(fh, index=False)

    redundancy_csv = outdir / "redundancy.csv"
    q_mean = posterior_mean_q(samples)
    red_rows = []
    model = samples.model
    if isinstance(model, MmtdModel):
        blocks = [
            (f"order{r}", unmatricize(q_mean[:, model.block_slice(r)], r), r)
            for r in range(1, model.max_order + 1)
        ]
    elif isinstance(model, MtdgModel):
        blocks = [
            (f"lag{l}", q_mean[:, model.block_slice(l)], 1)
            for l in range(1, model.n_lags + 1)
        ]
    else:
        blocks = [("shared", q_mean[:, model.block_slice()], 1)]
    for name, tensor, _order in blocks:
        for axis, score in enumerate(q_redundancy(tensor), start=1):
            red_rows.append({"block": name, "lag_axis": axis, "score": score})
    pd.DataFrame(red_rows).to_csv(redundancy_csv, index=False)

    conv_json = outdir / "convergence.json"
    conv_json.write_text(json.dumps(samples.diagnostics, indent=2, default=float))

    write_manifest(
        outdir,
        "summarize",
        args.argv,
        samples_dir=str(indir),
        outputs=[weights_csv.name, inclusion_csv.name, redundancy_csv.name, conv_json.name],
    )
    print(f"note: {INTERCEPT_CAVEAT}")
    print(f"wrote {weights_csv}, {inclusion_csv}, {redundancy_csv}")
    return 0


def cmd_replay(args) -> int:
    doc = json.loads(Path(args.manifest).read_text())
    argv = doc.get("argv")
    if not argv:
        raise CliError(f"{args.manifest}: manifest carries no argv to replay")
    print(f"replaying: mtdbayes {' '.join(argv)}")
    return main(argv)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mtdbayes",
        description="Bayesian mixture transition distribution models for "
        "high-order discrete-state Markov chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("discretize", help="quantile-bin a numeric series into states")
    p.add_argument("--input", required=True, help="numeric single-column CSV")
    p.add_argument("--bins", type=int, required=True, help="number of quantile bins K")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("simulate", help="generate a ground-truth chain and segments")
    p.add_argument("--scenario", required=True, help="scenario JSON")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    p.add_argument(
        "--context",
        type=int,
        default=None,
        help="training states prepended to valid.csv (default: the truth's max lag)",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="run MCMC on a state series")
    p.add_argument("--data", required=True, help="state CSV (header 'state', 1-based)")
    p.add_argument("--config", default=None, help="config JSON (model + mcmc sections)")
    p.add_argument("--profile", default=None, choices=PROFILE_NAMES)
    p.add_argument("--states", type=int, default=None, help="number of states K")
    p.add_argument("--lags", type=int, default=None, help="maximum lag horizon L")
    p.add_argument("--order", type=int, default=None, help="maximum mixing order R")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--chains", type=int, default=None)
    p.add_argument(
        "--paper-scale",
        action="store_true",
        help="published schedule (200k burn-in, 400k kept, thin 200) instead of desk scale",
    )
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("evaluate", help="score a fit on held-out data")
    p.add_argument("--samples", required=True, help="fit output directory")
    p.add_argument("--data", required=True, help="validation state CSV (with history context)")
    p.add_argument("--truth", default=None, help="truth JSON for L1 scoring")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("summarize", help="emit weight, inclusion, and redundancy tables")
    p.add_argument("--samples", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest", help="manifest.json written by a previous command")
    p.set_defaults(func=cmd_replay)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = list(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
