"""Simulated paired-dataset generation and loading.

Given reference images (a source directory or a built-in phantom), a physics
descriptor and a noise model, ``generate`` writes samples/{i}_x.pfm,
{i}_y.pfm (complex measurements become _re/_im pairs), optional per-sample
{i}_params.json, and a manifest.json that makes the whole tree reproducible:
sample i draws its physics parameters from child stream i, its noise from
child stream N+i, and any phantom randomness from child stream 2N+i of the
master seed.
"""

import json
import os

import numpy as np

from .core import derive_child
from .errors import ConfigError
from .imageio import read_image, write_image
from .phantoms import PHANTOMS, make_phantom
from .physics import (gen_bernoulli_mask, gen_cartesian_mri_mask,
                      gen_gaussian_kernel, gen_motion_kernel,
                      physics_from_config)

_GENERATORS = ("bernoulli_mask", "cartesian_mask", "gaussian_kernel",
               "motion_kernel", "gaussian_matrix")


def _json_dump(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _load_source_images(source_dir, count):
    names = sorted(n for n in os.listdir(source_dir)
                   if n.lower().endswith((".pgm", ".pfm")))
    if not names:
        raise ConfigError(f"dataset.source_dir: no .pgm/.pfm images in {source_dir!r}")
    if count is None:
        count = len(names)
    return [read_image(os.path.join(source_dir, names[i % len(names)]))
            for i in range(count)]


def _reference_images(ds_cfg, seed, base_dir):
    count = ds_cfg.get("count")
    if "source_dir" in ds_cfg:
        source = os.path.join(base_dir, ds_cfg["source_dir"])
        if not os.path.isdir(source):
            raise ConfigError(f"dataset.source_dir: {source!r} is not a directory")
        return _load_source_images(source, count)
    phantom = ds_cfg.get("phantom")
    if phantom not in PHANTOMS:
        raise ConfigError(
            f"dataset.phantom: {phantom!r} not one of {PHANTOMS} and no source_dir given")
    shape = tuple(ds_cfg.get("size", (32, 32)))
    if count is None:
        raise ConfigError("dataset.count: required for phantom datasets")
    return [make_phantom(phantom, shape, derive_child(seed, 2 * count + i))
            for i in range(count)]


def _generated_params(gen_cfg, shape, rng):
    kind = gen_cfg.get("kind")
    if kind == "bernoulli_mask":
        return {"mask": gen_bernoulli_mask(shape, gen_cfg["density"], rng)}
    if kind == "cartesian_mask":
        return {"mask": gen_cartesian_mri_mask(shape, gen_cfg["acceleration"],
                                               gen_cfg.get("center_fraction", 0.08),
                                               rng)}
    if kind == "gaussian_kernel":
        return {"kernel": gen_gaussian_kernel(gen_cfg["sigma"], gen_cfg["side"]),
                "shape": shape}
    if kind == "motion_kernel":
        return {"kernel": gen_motion_kernel(gen_cfg["length"], rng), "shape": shape}
    if kind == "gaussian_matrix":
        n = int(np.prod(shape))
        return {"m": gen_cfg["m"], "n": n, "seed": rng.seed}
    raise ConfigError(
        f"physics.generator.kind: {kind!r} not one of {_GENERATORS}")


def _physics_for_sample(phys_cfg, shape, i, seed):
    """Physics for sample i: generated parameters when a generator is set."""
    descriptor = phys_cfg.get("descriptor")
    if descriptor is None:
        raise ConfigError("physics.descriptor: required")
    noise_cfg = phys_cfg.get("noise", {"variant": "none"})
    gen_cfg = phys_cfg.get("generator")
    if gen_cfg is not None:
        params = _generated_params(gen_cfg, shape, derive_child(seed, i))
        cfg = {"descriptor": descriptor, "noise": noise_cfg,
               "params": _plain(params)}
        return physics_from_config(cfg), True
    params = dict(phys_cfg.get("params", {}))
    params.setdefault("shape", list(shape))
    cfg = {"descriptor": descriptor, "noise": noise_cfg, "params": params}
    return physics_from_config(cfg), False


def _plain(params):
    return {k: (v.tolist() if isinstance(v, np.ndarray)
                else list(v) if isinstance(v, tuple) else v)
            for k, v in params.items()}


def generate(config: dict, base_dir: str) -> dict:
    """Generate a paired dataset on disk; returns the manifest dict."""
    seed = config.get("seed")
    if seed is None:
        raise ConfigError("seed: required")
    ds_cfg = config.get("dataset")
    if not isinstance(ds_cfg, dict):
        raise ConfigError("dataset: section required")
    phys_cfg = config.get("physics")
    if not isinstance(phys_cfg, dict):
        raise ConfigError("physics: section required")
    out_dir = os.path.join(base_dir, config.get("output_dir", "out"))
    samples_dir = os.path.join(out_dir, "samples")
    os.makedirs(samples_dir, exist_ok=True)

    images = _reference_images(ds_cfg, seed, base_dir)
    count = len(images)
    per_sample = phys_cfg.get("generator") is not None

    entries = []
    fixed_params_cfg = None
    for i, x in enumerate(images):
        physics, generated = _physics_for_sample(phys_cfg, x.shape, i, seed)
        if physics.descriptor == "mri" and not np.iscomplexobj(x):
            x_fwd = x.astype(np.complex128)
        elif physics.descriptor == "compressed_sensing":
            x_fwd = x.ravel()
        else:
            x_fwd = x
        y = physics.forward(x_fwd, derive_child(seed, count + i))
        x_name = f"samples/{i:04d}_x.pfm"
        y_name = f"samples/{i:04d}_y.pfm"
        write_image(x, os.path.join(out_dir, x_name))
        write_image(np.atleast_2d(y), os.path.join(out_dir, y_name))
        entry = {"index": i, "x": x_name, "y": y_name,
                 "complex_y": bool(np.iscomplexobj(y))}
        if generated:
            p_name = f"samples/{i:04d}_params.json"
            _json_dump(physics.to_config(), os.path.join(out_dir, p_name))
            entry["params"] = p_name
        else:
            fixed_params_cfg = physics.to_config()
        entries.append(entry)

    manifest = {
        "name": config.get("name", "dataset"),
        "seed": seed,
        "count": count,
        "params_policy": "per_sample" if per_sample else "fixed",
        "physics": fixed_params_cfg,
        "samples": entries,
    }
    _json_dump(manifest, os.path.join(out_dir, "manifest.json"))
    return manifest


def load(manifest_path: str):
    """Load a generated dataset; yields (x, y, physics) per sample."""
    with open(manifest_path) as f:
        manifest = json.load(f)
    root = os.path.dirname(os.path.abspath(manifest_path))
    out = []
    for entry in manifest["samples"]:
        x = read_image(os.path.join(root, entry["x"]))
        y = read_image(os.path.join(root, entry["y"]))
        if not entry.get("complex_y", False) and np.iscomplexobj(y):
            y = y.real
        if manifest["params_policy"] == "per_sample":
            with open(os.path.join(root, entry["params"])) as f:
                physics = physics_from_config(json.load(f))
        else:
            physics = physics_from_config(manifest["physics"])
        if physics.descriptor == "compressed_sensing":
            y = y.ravel()
        out.append((x, y, physics))
    return manifest, out
