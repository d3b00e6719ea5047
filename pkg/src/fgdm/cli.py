"""Command-line entry point: reproducible experiments over all modules.

Exit codes: 0 success, 1 usage error, 2 runtime failure. Config precedence
is CLI flags > JSON config file (``--config``) > built-in defaults; the
defaults carry the published settings (eta 10, tilde-T 4, lr 1e-4, batch 8).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__

DEFAULTS = {
    "gen-data": {
        "n_train": 2000, "n_val": 100, "n_test": 100, "size": 64, "seed": 0,
        "band": "0.015,0.06", "shading": 0.04, "streak_strength": 0.05, "streak_count": 5,
        "png": False,
    },
    "train": {
        "epochs": 60, "batch": 8, "t_steps": 8, "eta_min": 1, "eta_max": 25,
        "lr": 1e-4, "lr_min": 1e-5, "base_width": 32, "latent_dim": 32,
        "loss": "adversarial", "recon_weight": 10.0, "seed": 0, "checkpoint_every": 0,
    },
    "translate": {"eta": 10.0, "tilde_t": 4, "seed": 0, "ablation": "full"},
    "sweep": {"etas": "5,10,15,20,25", "tilde_ts": "1,2,3,4,5", "seed": 0},
    "analyze": {"nbins": 64},
    "evaluate": {},
    "serve": {"host": "127.0.0.1", "port": 8080},
}


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def write_manifest(directory: Path, command: str, config: dict, **extra) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "tool": "fgdm",
        "version": __version__,
        "command": command,
        "created": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "config": config,
    }
    manifest.update(extra)
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2, default=str))


def build_parser() -> _Parser:
    parser = _Parser(prog="fgdm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fgdm {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add_common(p):
        p.add_argument("--config", help="JSON config file (flags override it)")
        p.add_argument("--verbose", action="store_true")

    p = sub.add_parser("gen-data", help="generate a paired phantom dataset (train/val/test)")
    add_common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n-train", type=int, dest="n_train")
    p.add_argument("--n-val", type=int, dest="n_val")
    p.add_argument("--n-test", type=int, dest="n_test")
    p.add_argument("--size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--band", help="radial band as 'lo,hi' in cycles/pixel")
    p.add_argument("--shading", type=float, help="band shading strength")
    p.add_argument("--streak-strength", type=float, dest="streak_strength")
    p.add_argument("--streak-count", type=int, dest="streak_count")
    p.add_argument("--png", action="store_true", help="also write browsable PNGs")

    p = sub.add_parser("train", help="train on the target half of a dataset")
    add_common(p)
    p.add_argument("--data", required=True, help="dataset directory (uses its target/ images only)")
    p.add_argument("--val-data", dest="val_data", help="optional dataset directory for validation")
    p.add_argument("--out", required=True, help="checkpoint file to write")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--T", type=int, dest="t_steps")
    p.add_argument("--eta-min", type=int, dest="eta_min")
    p.add_argument("--eta-max", type=int, dest="eta_max")
    p.add_argument("--lr", type=float)
    p.add_argument("--lr-min", type=float, dest="lr_min")
    p.add_argument("--base-width", type=int, dest="base_width")
    p.add_argument("--latent-dim", type=int, dest="latent_dim")
    p.add_argument("--loss", choices=["adversarial", "simple"])
    p.add_argument("--recon-weight", type=float, dest="recon_weight")
    p.add_argument("--seed", type=int)
    p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every")

    p = sub.add_parser("translate", help="zero-shot translate one image")
    add_common(p)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", required=True, dest="input")
    p.add_argument("--out", required=True)
    p.add_argument("--eta", type=float)
    p.add_argument("--tilde-t", type=int, dest="tilde_t")
    p.add_argument("--seed", type=int)
    p.add_argument("--ablation", choices=["full", "no_high_freq", "no_low_freq"])
    p.add_argument("--dump-intermediates", dest="dump_intermediates", help="directory for per-step states")

    p = sub.add_parser("sweep", help="grid over eta and tilde-T with metrics")
    add_common(p)
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", required=True, dest="input")
    p.add_argument("--target", help="paired reference image for target metrics")
    p.add_argument("--etas", help="comma-separated eta values")
    p.add_argument("--tilde-ts", dest="tilde_ts", help="comma-separated step counts")
    p.add_argument("--seed", type=int)
    p.add_argument("--report", required=True, help="CSV report path")

    p = sub.add_parser("analyze", help="radial spectral profiles and power-law fits")
    add_common(p)
    p.add_argument("--image", help="single image (PSD profile)")
    p.add_argument("--compare", help="second image (difference profile)")
    p.add_argument("--dir", dest="directory", help="directory of images (mean PSD + power-law fit)")
    p.add_argument("--nbins", type=int)
    p.add_argument("--out", required=True, help="output prefix (writes .csv and .json)")

    p = sub.add_parser("evaluate", help="faithfulness/realism report over directories")
    add_common(p)
    p.add_argument("--translated", required=True)
    p.add_argument("--sources", required=True)
    p.add_argument("--targets")
    p.add_argument("--report", required=True, help="report path (.csv or .json)")

    p = sub.add_parser("serve", help="HTTP API (and UI, when built) for interactive tuning")
    add_common(p)
    p.add_argument("--ckpt")
    p.add_argument("--data", help="directory of images to preload")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--ui-dir", dest="ui_dir", help="static UI bundle directory")

    return parser


def _merge_config(args: argparse.Namespace, command: str) -> dict:
    """CLI flags > config file > built-in defaults."""
    cfg = dict(DEFAULTS.get(command, {}))
    if getattr(args, "config", None):
        file_cfg = json.loads(Path(args.config).read_text())
        section = file_cfg.get(command, file_cfg)
        for key, value in section.items():
            cfg[key.replace("-", "_")] = value
    for key, value in vars(args).items():
        if key in ("command", "config"):
            continue
        if value is None or value is False:  # flag not given (identity: 0 != False here)
            continue
        cfg[key] = value
    return cfg


# --- subcommand bodies ------------------------------------------------------


def _cmd_gen_data(cfg: dict) -> int:
    from .phantoms import DegradationSpec, PhantomSpec, load_paired_dataset, make_paired_dataset
    from .imagecore import save_image

    out = Path(cfg["out"])
    lo, hi = (float(x) for x in str(cfg["band"]).split(","))
    splits = [("train", cfg["n_train"], 0), ("val", cfg["n_val"], 1), ("test", cfg["n_test"], 2)]
    for name, count, offset in splits:
        if count <= 0:
            continue
        pspec = PhantomSpec(size=cfg["size"], seed=cfg["seed"] * 10 + offset)
        dspec = DegradationSpec(
            band=(lo, hi),
            shading_strength=cfg["shading"],
            streak_strength=cfg["streak_strength"],
            streak_count=cfg["streak_count"],
            seed=cfg["seed"] * 10 + offset,
        )
        make_paired_dataset(count, pspec, dspec, out / name)
        if cfg["png"]:
            data = load_paired_dataset(out / name)
            for kind in ("targets", "sources"):
                png_dir = out / name / f"{kind[:-1]}_png"
                png_dir.mkdir(exist_ok=True)
                for i, img in enumerate(data[kind]):
                    save_image(img, png_dir / f"{i:04d}.png")
        print(f"wrote {count} pairs to {out / name}")
    write_manifest(out, "gen-data", cfg)
    return 0


def _cmd_train(cfg: dict) -> int:
    from .model import save_checkpoint
    from .phantoms import load_image_dir
    from .training import TrainingConfig, train

    # zero-shot contract: only the target half of the dataset is read
    targets, _ = load_image_dir(Path(cfg["data"]) / "target")
    val_images = None
    if cfg.get("val_data"):
        val_images, _ = load_image_dir(Path(cfg["val_data"]) / "target")
    tcfg = TrainingConfig(
        epochs=cfg["epochs"],
        batch_size=cfg["batch"],
        lr_initial=cfg["lr"],
        lr_min=cfg["lr_min"],
        eta_range=(cfg["eta_min"], cfg["eta_max"]),
        T=cfg["t_steps"],
        seed=cfg["seed"],
        checkpoint_every=cfg["checkpoint_every"],
        base_width=cfg["base_width"],
        latent_dim=cfg["latent_dim"],
        loss=cfg["loss"],
        recon_weight=cfg["recon_weight"],
    )
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)

    def on_epoch(trainer, stats):
        if cfg.get("verbose"):
            print(f"epoch {stats.epoch}: d={stats.d_loss:.4f} g={stats.g_loss:.4f} "
                  f"lr={stats.lr:.2e} val_psnr={stats.val_psnr:.2f}")
        cadence = tcfg.checkpoint_every
        if cadence > 0 and (stats.epoch + 1) % cadence == 0:
            save_checkpoint(out.with_suffix(f".epoch{stats.epoch:03d}.npz"),
                            trainer.gen, trainer.critic, trainer.sched, {"epoch": stats.epoch})

    gen, critic, log = train(targets, tcfg, val_images=val_images, on_epoch=on_epoch)
    from .schedule import make_schedule

    save_checkpoint(out, gen, critic, make_schedule(tcfg.T), {"training_config": asdict(tcfg)})
    log.to_csv(out.with_suffix(".log.csv"))
    write_manifest(out.parent, "train", cfg, checkpoint=out.name, checkpoint_sha256=_sha256(out))
    print(f"checkpoint written to {out}")
    return 0


def _cmd_translate(cfg: dict) -> int:
    from .imagecore import load_image, save_image
    from .model import load_checkpoint
    from .translate import TranslationConfig, translate

    gen, _, sched, _ = load_checkpoint(cfg["ckpt"])
    c0 = load_image(cfg["input"])
    tc = TranslationConfig(
        eta=cfg["eta"],
        tilde_T=cfg["tilde_t"],
        seed=cfg["seed"],
        ablation=cfg["ablation"],
        record_intermediates=bool(cfg.get("dump_intermediates")),
    )
    result = translate(c0, tc, gen, sched)
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    save_image(result.output, out)
    if cfg.get("dump_intermediates"):
        dump = Path(cfg["dump_intermediates"])
        dump.mkdir(parents=True, exist_ok=True)
        for i, state in enumerate(result.intermediates):
            np.clip(state, 0.0, 1.0, out=state)
            save_image(state, dump / f"step_{i:02d}.png")
    write_manifest(out.parent, "translate", cfg, checkpoint_sha256=_sha256(Path(cfg["ckpt"])))
    print(f"translated image written to {out}")
    return 0


def _cmd_sweep(cfg: dict) -> int:
    from .imagecore import load_image
    from .model import load_checkpoint
    from .translate import sweep, sweep_table

    gen, _, sched, _ = load_checkpoint(cfg["ckpt"])
    c0 = load_image(cfg["input"])
    refs = None
    if cfg.get("target"):
        refs = (c0, load_image(cfg["target"]))
    etas = [float(x) for x in str(cfg["etas"]).split(",")]
    tilde_ts = [int(x) for x in str(cfg["tilde_ts"]).split(",")]
    cells = sweep(c0, etas, tilde_ts, gen, sched, refs=refs, seed=cfg["seed"])
    rows = sweep_table(cells)
    report = Path(cfg["report"])
    report.parent.mkdir(parents=True, exist_ok=True)
    cols = list(rows[0].keys())
    lines = [",".join(cols)] + [",".join(f"{r[c]:.6g}" for c in cols) for r in rows]
    report.write_text("\n".join(lines) + "\n")
    write_manifest(report.parent, "sweep", cfg, checkpoint_sha256=_sha256(Path(cfg["ckpt"])))
    print(f"sweep report written to {report} ({len(rows)} cells)")
    return 0


def _cmd_analyze(cfg: dict) -> int:
    from .imagecore import load_image
    from .phantoms import load_image_dir
    from .spectral import fit_psd_powerlaw, radial_frequency_mse, radial_psd_profile

    nbins = cfg["nbins"]
    payload: dict = {"nbins": nbins}
    if cfg.get("directory"):
        imgs, names = load_image_dir(cfg["directory"])
        profile = radial_psd_profile(list(imgs), nbins=nbins)
        k, a = fit_psd_powerlaw(list(imgs), nbins=nbins)
        payload.update(kind="psd", images=names, powerlaw={"k": k, "a": a})
    elif cfg.get("image") and cfg.get("compare"):
        profile = radial_frequency_mse(load_image(cfg["image"]), load_image(cfg["compare"]), nbins)
        payload.update(kind="difference", images=[cfg["image"], cfg["compare"]])
    elif cfg.get("image"):
        profile = radial_psd_profile(load_image(cfg["image"]), nbins=nbins)
        payload.update(kind="psd", images=[cfg["image"]])
    else:
        raise ValueError("analyze needs --image (optionally --compare) or --dir")

    rows = profile.rows()
    payload["profile"] = rows
    payload["profile_log10"] = [[f, float(np.log10(v)) if v > 0 else None] for f, v in rows]
    out = Path(cfg["out"])
    out.parent.mkdir(parents=True, exist_ok=True)
    out.with_suffix(".json").write_text(json.dumps(payload, indent=2))
    csv_lines = ["bin_center,value,log10_value"]
    for f, v in rows:
        log_v = f"{np.log10(v):.6g}" if v > 0 else ""
        csv_lines.append(f"{f:.6g},{v:.6g},{log_v}")
    out.with_suffix(".csv").write_text("\n".join(csv_lines) + "\n")
    print(f"profiles written to {out.with_suffix('.csv')} and {out.with_suffix('.json')}")
    return 0


def _cmd_evaluate(cfg: dict) -> int:
    from .metrics import evaluate
    from .phantoms import load_image_dir

    translated, _ = load_image_dir(cfg["translated"])
    sources, _ = load_image_dir(cfg["sources"])
    targets = None
    if cfg.get("targets"):
        targets, _ = load_image_dir(cfg["targets"])
        targets = list(targets)
    report = evaluate(list(translated), list(sources), targets=targets)
    out = Path(cfg["report"])
    out.parent.mkdir(parents=True, exist_ok=True)
    if out.suffix == ".json":
        out.write_text(report.to_json())
    else:
        report.to_csv(out)
    write_manifest(out.parent, "evaluate", cfg)
    for key, value in report.means.items():
        print(f"{key}: {value:.4f}")
    return 0


def _cmd_serve(cfg: dict) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(checkpoint=cfg.get("ckpt"), data_dir=cfg.get("data"), ui_dir=cfg.get("ui_dir"))
    uvicorn.run(app, host=cfg["host"], port=cfg["port"])
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "train": _cmd_train,
    "translate": _cmd_translate,
    "sweep": _cmd_sweep,
    "analyze": _cmd_analyze,
    "evaluate": _cmd_evaluate,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        cfg = _merge_config(args, args.command)
        return _COMMANDS[args.command](cfg)
    except KeyboardInterrupt:
        return 2
    except Exception as exc:
        print(f"fgdm {args.command}: error: {exc}", file=sys.stderr)
        if getattr(args, "verbose", False):
            raise
        return 2


if __name__ == "__main__":
    sys.exit(main())
