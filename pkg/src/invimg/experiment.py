"""End-to-end experiment runner: reconstruct every sample, score it, and
write results.csv plus reconstructed images (and summary figures).

Per-sample randomness is wired off the master seed: the reconstruction
stream for sample i is child 3N+i, and loss j on sample i uses child
(4+j)N+i, so parallel and serial execution would order draws identically.
"""

import os
import time

import numpy as np

from . import losses as losses_mod
from . import metrics as metrics_mod
from .core import derive_child
from .dataset import generate as generate_dataset
from .dataset import load as load_dataset
from .errors import ConfigError
from .fidelity import DataFidelity
from .imageio import write_image
from .linop import adjoint_test
from .optim import AlgoConfig, artifact_removal, solve
from .priors import Denoiser, Prior
from .sampling import ChainConfig, ula_sample
from . import transforms

METHOD_NAMES = ("pgd", "fista", "admm", "drs", "pdhg", "artifact_removal",
                "pinv", "ula")


def build_reconstructor(method_cfg: dict, seed: int):
    """Turn a method config section into a callable (y, physics) -> x_hat."""
    name = method_cfg.get("name")
    if name not in METHOD_NAMES:
        raise ConfigError(f"method.name: {name!r} not one of {METHOD_NAMES}")

    if name == "artifact_removal":
        denoiser = Denoiser.from_config(method_cfg.get("denoiser",
                                                       {"variant": "gaussian_smoother"}))
        mode = method_cfg.get("mode", "adjoint")
        sigma = method_cfg.get("sigma", 0.0)
        return lambda y, physics: artifact_removal(denoiser, y, physics, sigma, mode)

    if name == "pinv":
        from .solvers import pinv_apply
        tol = method_cfg.get("tol", 1e-8)
        return lambda y, physics: pinv_apply(physics.map, y, tol=tol)

    if name == "ula":
        fid = DataFidelity.from_config(method_cfg.get("fidelity", {"variant": "l2"}))
        prior = Prior.from_config(method_cfg.get("prior", {"variant": "tikhonov"}))
        chain = ChainConfig(**method_cfg.get("chain", {}))

        def run_ula(y, physics):
            _, stats = ula_sample(y, physics, fid, prior, chain,
                                  derive_child(seed, 0))
            return stats.mean

        return run_ula

    # splitting algorithms
    fid = DataFidelity.from_config(method_cfg.get("fidelity", {"variant": "l2"}))
    prior_cfg = method_cfg.get("prior")
    denoiser_cfg = method_cfg.get("denoiser")
    if prior_cfg is not None and denoiser_cfg is not None:
        raise ConfigError("method: give either prior or denoiser, not both")
    prior = None
    if prior_cfg is not None:
        prior = Prior.from_config(prior_cfg)
    elif denoiser_cfg is not None:
        prior = Denoiser.from_config(denoiser_cfg)
    algo = AlgoConfig(algorithm=name, **method_cfg.get("algo", {}))
    algo.validate()
    return lambda y, physics: solve(y, physics, fid, prior, algo)[0]


def _loss_fn(loss_cfg, model, seed, count, sample_index, loss_index):
    name = loss_cfg.get("name")
    rng = derive_child(seed, (4 + loss_index) * count + sample_index)

    def run(x_hat, x, y, physics):
        if name == "sup_mse":
            target = x.ravel() if x_hat.shape != x.shape else x
            return losses_mod.sup_mse(x_hat, target).value
        if name == "sure_gaussian":
            return losses_mod.sure_gaussian(
                lambda v: model(v, physics), y, loss_cfg["sigma"], rng,
                mc_probes=loss_cfg.get("probes", 1),
                probe_step=loss_cfg.get("probe_step")).value
        if name == "r2r_gaussian":
            return losses_mod.r2r_gaussian(
                model, y, physics, loss_cfg["sigma"],
                alpha=loss_cfg.get("alpha", 0.5), rng=rng,
                draws=loss_cfg.get("draws", 1)).value
        if name == "splitting":
            return losses_mod.splitting_loss(
                model, y, physics, loss_cfg.get("q", 0.9), rng).value
        if name == "ei":
            kinds = tuple(loss_cfg.get("kinds", ["rot90", "flip"]))
            shape = physics.map.domain_shape
            sampler = lambda r: transforms.random_element(r, shape, kinds)
            return losses_mod.ei_loss(model, y, physics, sampler, rng).value
        raise ConfigError(f"losses[{loss_index}].name: unknown loss {name!r}")

    return run


def _metric_config(config):
    return metrics_mod.MetricConfig(**config.get("metric_config", {}))


def run(config: dict, base_dir: str) -> dict:
    """Run the experiment described by config; returns a summary dict."""
    seed = config.get("seed")
    if seed is None:
        raise ConfigError("seed: required")
    out_dir = os.path.join(base_dir, config.get("output_dir", "out"))
    os.makedirs(out_dir, exist_ok=True)

    ds_cfg = config.get("dataset", {})
    if "manifest" in ds_cfg:
        manifest_path = os.path.join(base_dir, ds_cfg["manifest"])
    else:
        generate_dataset(config, base_dir)
        manifest_path = os.path.join(out_dir, "manifest.json")
    manifest, samples = load_dataset(manifest_path)
    count = manifest["count"]

    method_cfg = config.get("method")
    if not isinstance(method_cfg, dict):
        raise ConfigError("method: section required")
    method_name = method_cfg.get("name", "?")
    metric_names = list(config.get("metrics", ["psnr"]))
    for m in metric_names:
        if m not in metrics_mod.METRICS:
            raise ConfigError(f"metrics: unknown metric {m!r}")
    loss_cfgs = list(config.get("losses", []))
    loss_names = [lc.get("name", f"loss{j}") for j, lc in enumerate(loss_cfgs)]
    mcfg = _metric_config(config)
    timing = bool(config.get("timing", False))

    model = build_reconstructor(method_cfg, seed)
    recon_dir = os.path.join(out_dir, "recon")
    os.makedirs(recon_dir, exist_ok=True)

    header = ["sample_id", "method"] + metric_names + loss_names + ["wall_time_ms", "error"]
    rows = []
    recons = []
    for i, (x, y, physics) in enumerate(samples):
        row = {"sample_id": str(i), "method": method_name, "error": ""}
        t0 = time.perf_counter()
        x_hat = None
        try:
            x_hat = model(y, physics)
            if x_hat.shape != x.shape:
                x_hat = x_hat.reshape(x.shape)
        except Exception as exc:  # recorded, run continues
            row["error"] = f"reconstruction: {exc}"
        elapsed_ms = (time.perf_counter() - t0) * 1000.0
        row["wall_time_ms"] = f"{elapsed_ms:.3f}" if timing else "0"

        if x_hat is not None:
            for m in metric_names:
                try:
                    row[m] = metrics_mod.format_metric(
                        metrics_mod.METRICS[m](x_hat, x, mcfg))
                except Exception as exc:
                    row[m] = ""
                    row["error"] += f" {m}: {exc}"
            for j, lc in enumerate(loss_cfgs):
                fn = _loss_fn(lc, model, seed, count, i, j)
                try:
                    row[loss_names[j]] = metrics_mod.format_metric(
                        fn(x_hat, x, y, physics))
                except Exception as exc:
                    row[loss_names[j]] = ""
                    row["error"] += f" {loss_names[j]}: {exc}"
            write_image(x_hat if np.iscomplexobj(x_hat) else np.real(x_hat),
                        os.path.join(recon_dir, f"{i:04d}_xhat.pfm"))
            preview = np.abs(x_hat) if np.iscomplexobj(x_hat) else x_hat
            write_image(preview, os.path.join(recon_dir, f"{i:04d}_xhat.pgm"))
        row["error"] = row["error"].strip()
        rows.append(row)
        recons.append(x_hat)

    mean_row = {"sample_id": "mean", "method": method_name, "error": ""}
    for col in metric_names + loss_names + ["wall_time_ms"]:
        present = [r[col] for r in rows if r.get(col) not in (None, "")]
        if not present:
            mean_row[col] = ""
        elif any(v in ("inf", "-inf") for v in present):
            mean_row[col] = next(v for v in present if v in ("inf", "-inf"))
        elif col == "wall_time_ms":
            mean_row[col] = f"{np.mean([float(v) for v in present]):.3f}" if timing else "0"
        else:
            mean_row[col] = metrics_mod.format_metric(
                float(np.mean([float(v) for v in present])))
    rows.append(mean_row)

    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(r.get(col, "")) for col in header) + "\n")

    if config.get("figures", True):
        from .report import render_figures
        render_figures(samples, recons, rows, header, out_dir)

    return {"csv": csv_path, "rows": rows, "header": header}


def adjoint_check(config: dict, base_dir: str) -> float:
    """Build the configured physics and report the max dot-test error."""
    seed = config.get("seed", 0)
    ds_cfg = config.get("dataset", {})
    shape = tuple(ds_cfg.get("size", (32, 32)))
    from .dataset import _physics_for_sample
    physics, _ = _physics_for_sample(config.get("physics", {}), shape, 0, seed)
    return adjoint_test(physics.map, derive_child(seed, 10 ** 6), trials=20)
