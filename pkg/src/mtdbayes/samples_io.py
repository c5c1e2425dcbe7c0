"""On-disk format for fitted samples.

A fit directory holds:

- ``chain_<i>.csv``: one row per kept iteration with the flattened mixture
  weights, the collapsed data log-marginal, and the prior-swap proposal and
  acceptance counts since the previous kept iteration.
- ``samples.npz``: the complete draw arrays including the matricized
  transition blocks, plus the model and schedule needed to reload.
- ``model.json``: the model specification (dimensions and priors).
- ``convergence.json``: per-parameter effective sample size and split-chain
  scale reduction, the swap acceptance rate, and chain timings.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

from .inference import McmcConfig, MmtdModel, MtdgModel, MtdModel, Model, PosteriorSamples
from .priors import DirichletSpec, SBMSpec, SDMSpec


def prior_to_dict(prior) -> dict:
    if isinstance(prior, DirichletSpec):
        return {"type": "dirichlet", "alpha": prior.alpha.tolist()}
    if isinstance(prior, SDMSpec):
        return {"type": "sdm", "alpha": prior.alpha.tolist(), "beta": prior.beta}
    if isinstance(prior, SBMSpec):
        return {
            "type": "sbm",
            "pi1": prior.pi1.tolist(),
            "pi3": prior.pi3.tolist(),
            "eta": prior.eta,
            "gamma": prior.gamma.tolist(),
            "delta": prior.delta.tolist(),
        }
    raise TypeError(f"unsupported prior: {type(prior).__name__}")


def prior_from_dict(doc: dict):
    kind = doc["type"]
    if kind == "dirichlet":
        return DirichletSpec(np.array(doc["alpha"]))
    if kind == "sdm":
        return SDMSpec(np.array(doc["alpha"]), doc["beta"])
    if kind == "sbm":
        return SBMSpec(
            np.array(doc["pi1"]),
            np.array(doc["pi3"]),
            doc["eta"],
            np.array(doc["gamma"]),
            np.array(doc["delta"]),
        )
    raise ValueError(f"unknown prior type {kind!r}")


def model_to_dict(model: Model) -> dict:
    if isinstance(model, MmtdModel):
        return {
            "kind": "mmtd",
            "n_states": model.n_states,
            "n_lags": model.n_lags,
            "max_order": model.max_order,
            "order_prior": prior_to_dict(model.order_prior),
            "config_priors": [prior_to_dict(p) for p in model.config_priors],
            "q_alpha": model.q_alpha.tolist(),
        }
    if isinstance(model, MtdgModel):
        return {
            "kind": "mtdg",
            "n_states": model.n_states,
            "n_lags": model.n_lags,
            "lam_prior": prior_to_dict(model.lam_prior),
            "q0_alpha": model.q0_alpha.tolist(),
            "q_alpha": model.q_alpha.tolist(),
        }
    if isinstance(model, MtdModel):
        return {
            "kind": "mtd",
            "n_states": model.n_states,
            "n_lags": model.n_lags,
            "lam_prior": prior_to_dict(model.lam_prior),
            "q_alpha": model.q_alpha.tolist(),
        }
    raise TypeError(f"unsupported model: {type(model).__name__}")


def model_from_dict(doc: dict) -> Model:
    kind = doc["kind"]
    if kind == "mmtd":
        return MmtdModel(
            n_states=doc["n_states"],
            n_lags=doc["n_lags"],
            max_order=doc["max_order"],
            order_prior=prior_from_dict(doc["order_prior"]),
            config_priors=[prior_from_dict(p) for p in doc["config_priors"]],
            q_alpha=np.array(doc["q_alpha"]),
        )
    if kind == "mtdg":
        return MtdgModel(
            n_states=doc["n_states"],
            n_lags=doc["n_lags"],
            lam_prior=prior_from_dict(doc["lam_prior"]),
            q0_alpha=np.array(doc["q0_alpha"]),
            q_alpha=np.array(doc["q_alpha"]),
        )
    if kind == "mtd":
        return MtdModel(
            n_states=doc["n_states"],
            n_lags=doc["n_lags"],
            lam_prior=prior_from_dict(doc["lam_prior"]),
            q_alpha=np.array(doc["q_alpha"]),
        )
    raise ValueError(f"unknown model kind {kind!r}")


def chain_table(samples: PosteriorSamples, chain: int) -> pd.DataFrame:
    cols = {name: samples.weights[chain, :, j] for j, name in enumerate(samples.weight_names)}
    cols["log_marginal"] = samples.log_marginal[chain]
    cols["swap_attempts"] = samples.swap_attempts[chain]
    cols["swap_accepts"] = samples.swap_accepts[chain]
    table = pd.DataFrame(cols)
    table.insert(0, "iteration", np.arange(1, samples.n_kept + 1) * samples.config.thin)
    return table


def save_samples(samples: PosteriorSamples, outdir: str | Path) -> list[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for chain in range(samples.n_chains):
        path = outdir / f"chain_{chain}.csv"
        chain_table(samples, chain).to_csv(path, index=False)
        written.append(path)
    model_path = outdir / "model.json"
    model_path.write_text(json.dumps(model_to_dict(samples.model), indent=2))
    written.append(model_path)
    npz_path = outdir / "samples.npz"
    np.savez_compressed(
        npz_path,
        weights=samples.weights,
        q=samples.q,
        alloc_counts=samples.alloc_counts,
        log_marginal=samples.log_marginal,
        swap_attempts=samples.swap_attempts,
        swap_accepts=samples.swap_accepts,
        model_json=json.dumps(model_to_dict(samples.model)),
        config_json=json.dumps(asdict(samples.config)),
        weight_names=np.array(samples.weight_names),
    )
    written.append(npz_path)
    conv_path = outdir / "convergence.json"
    # Wall-clock telemetry is run-specific and lives in the manifest; the
    # statistical outputs here replay bit-identically.
    diagnostics = {k: v for k, v in samples.diagnostics.items() if k != "chain_seconds"}
    conv_path.write_text(json.dumps(diagnostics, indent=2, default=float))
    written.append(conv_path)
    return written


def load_samples(indir: str | Path) -> PosteriorSamples:
    indir = Path(indir)
    npz_path = indir / "samples.npz"
    if not npz_path.exists():
        raise FileNotFoundError(f"no samples.npz under {indir}")
    with np.load(npz_path, allow_pickle=False) as z:
        model = model_from_dict(json.loads(str(z["model_json"])))
        config = McmcConfig(**json.loads(str(z["config_json"])))
        samples = PosteriorSamples(
            model=model,
            config=config,
            weight_names=[str(n) for n in z["weight_names"]],
            weights=z["weights"],
            q=z["q"],
            alloc_counts=z["alloc_counts"],
            log_marginal=z["log_marginal"],
            swap_attempts=z["swap_attempts"],
            swap_accepts=z["swap_accepts"],
        )
    conv_path = indir / "convergence.json"
    if conv_path.exists():
        samples.diagnostics = json.loads(conv_path.read_text())
    return samples
