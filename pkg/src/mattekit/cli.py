"""Command-line entry point: ``mattekit <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import combine, losses, metrics, rosta
from .config import apply_config, config_path, load_config, setup_logging
from .datasets import (
    dedup,
    ingest_backgrounds,
    make_tracks,
    read_manifest,
    sample_backgrounds,
    split_backgrounds,
    write_manifest,
)
from .datasets.manifest import group_by_id
from .errors import MatteKitError
from .imgcore import io
from .rssn import BatchItem, GatePolicy, SolverParams, compose_batch

log = logging.getLogger("mattekit")

EXIT_OK, EXIT_INVALID, EXIT_PARTIAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _log(msg: str, **fields) -> None:
    log.info(msg, extra={"fields": fields})


def _default_workers() -> int:
    return os.cpu_count() or 1


# --- subcommand handlers -------------------------------------------------


def cmd_rosta(args) -> int:
    alpha = io.read_gray(args.alpha)
    mask = rosta.make_rosta(alpha, args.kind, args.kernel, args.delta)
    out = io.write_u8(args.out, rosta.to_trimap(mask))
    sidecar = {"kind": mask.kind, "kernel": mask.kernel, "delta": mask.delta, "alpha": str(args.alpha), "out": str(out)}
    Path(str(out) + ".json").write_text(json.dumps(sidecar) + "\n", encoding="utf-8")
    _log("rosta written", **sidecar)
    return EXIT_OK


def load_glance(path, kind: str) -> np.ndarray:
    """A ``.npy`` (H, W, C) probability map, or a trimap/mask PNG read as one-hot."""
    path = Path(path)
    if path.suffix.lower() == ".npy":
        return np.load(path)
    return rosta.from_trimap(io.read_gray_u8(path), kind).one_hot()


def cmd_merge(args) -> int:
    glance = load_glance(args.glance, args.kind)
    focus = io.read_gray(args.focus)
    io.write_gray(args.out, combine.cm_merge(args.kind, glance, focus), bits=args.bits)
    _log("merge written", kind=args.kind.upper(), out=str(args.out))
    return EXIT_OK


def cmd_ensemble(args) -> int:
    mattes = [io.read_gray(p) for p in args.inputs]
    io.write_gray(args.out, combine.ensemble_median(*mattes), bits=args.bits)
    _log("ensemble written", out=str(args.out))
    return EXIT_OK


def cmd_hybrid(args) -> int:
    cfg = combine.HybridConfig(Fraction(args.d1), Fraction(args.d2))
    if args.reference:
        width, height = io.image_size(args.reference)
    elif args.width and args.height:
        width, height = args.width, args.height
    else:
        raise UsageError("hybrid needs --reference or both --width and --height")
    transition = io.read_gray_u8(args.transition)
    t_mask = transition == 128 if args.transition_format == "trimap" else transition >= 128
    out = combine.hybrid_merge(io.read_gray(args.initial), t_mask, io.read_gray(args.focus), width, height)
    io.write_gray(args.out, out, bits=args.bits)
    record = {**cfg.as_record(), "width": width, "height": height, "out": str(args.out)}
    record["pass_sizes"] = cfg.pass_sizes(width, height)
    Path(str(args.out) + ".json").write_text(json.dumps(record) + "\n", encoding="utf-8")
    _log("hybrid written", **record)
    return EXIT_OK


def _eval_one(job):
    name, pred_path, gt_path, trimap_path = job
    pred, gt = io.read_gray(pred_path), io.read_gray(gt_path)
    mask = rosta.from_trimap(io.read_gray_u8(trimap_path), "TT") if trimap_path else None
    report = metrics.evaluate(pred, gt, mask)
    if trimap_path:
        report.regions_source = f"trimap:{trimap_path}"
    return {"id": name, **report.as_record()}


def cmd_eval(args) -> int:
    gt_files = {p.stem: p for p in io.list_images(args.gt_dir)}
    pred_files = {p.stem: p for p in io.list_images(args.pred_dir)}
    trimaps = {p.stem: p for p in io.list_images(args.trimap_dir)} if args.trimap_dir else {}
    jobs, missing = [], []
    for name in sorted(gt_files):
        if name not in pred_files:
            missing.append(name)
            continue
        jobs.append((name, pred_files[name], gt_files[name], trimaps.get(name)))
    records, failures = _map(_eval_one, jobs, args.workers)
    summary = {"id": "__mean__", "count": len(records)}
    summary.update(metrics.summarize([metrics.MetricReport(**{k: r[k] for k in metrics.METRIC_FIELDS}) for r in records]))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")
        fh.write(json.dumps(summary) + "\n")
    for name in missing:
        failures.append({"id": name, "error": "no prediction"})
    for f in failures:
        log.error("eval item failed", extra={"fields": f})
    _log("eval summary", **summary)
    return EXIT_PARTIAL if failures else EXIT_OK


def _map(fn, jobs, workers):
    """Apply ``fn`` to jobs in order; returns (results, failure records)."""
    results, failures = [], []
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(fn, j) for j in jobs]
            outcomes = []
            for f in futures:
                try:
                    outcomes.append((f.result(), None))
                except Exception as exc:  # noqa: BLE001
                    outcomes.append((None, exc))
    else:
        outcomes = []
        for j in jobs:
            try:
                outcomes.append((fn(j), None))
            except Exception as exc:  # noqa: BLE001
                outcomes.append((None, exc))
    for job, (res, exc) in zip(jobs, outcomes):
        if exc is None:
            results.append(res)
        else:
            failures.append({"id": str(job[0]), "error": f"{type(exc).__name__}: {exc}"})
    return results, failures


def cmd_losses(args) -> int:
    gt = io.read_gray(args.gt)
    pred = io.read_gray(args.pred)
    mask = rosta.from_trimap(io.read_gray_u8(args.trimap), args.kind)
    bt = args.kind.upper() == "BT"
    if args.focus:
        focus = io.read_gray(args.focus)
    else:
        # the BT focus channel carries 1 - alpha
        focus = 1.0 - pred if bt else pred
    if args.glance:
        glance = load_glance(args.glance, args.kind)
    else:
        # no glance output given: use the hard representation of the prediction
        glance = rosta.make_rosta(pred, args.kind).one_hot()
    if args.fg and args.bg:
        fg, bg = io.read_image(args.fg), io.read_image(args.bg)
    else:
        fg = np.ones(gt.shape + (3,))
        bg = np.zeros(gt.shape + (3,))
    weights = losses.LossWeights(args.lambda1, args.lambda2, args.lambda3)
    target = 1.0 - gt if bt else None
    report = losses.loss_total(glance, mask.labels, focus, gt, mask.transition, pred, fg, bg, weights, focus_target=target)
    record = report.as_record()
    record["weights"] = {"lambda1": weights.lambda1, "lambda2": weights.lambda2, "lambda3": weights.lambda3}
    record["comp_images"] = "given" if args.fg and args.bg else "white-on-black"
    text = json.dumps(record)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def _gate_policy(args) -> GatePolicy:
    if args.force_all:
        return GatePolicy.all_on()
    return GatePolicy(
        denoise="off" if args.no_denoise else "random",
        blur="off" if args.no_blur else "random",
        noise="off" if args.no_noise else "random",
    )


def batch_items(entries) -> list[BatchItem]:
    items = []
    for image_id, roles in group_by_id(entries).items():
        if "alpha" not in roles:
            raise MatteKitError(f"manifest item {image_id!r} has no alpha entry")
        if "original" in roles:
            items.append(BatchItem(image_id, roles["original"].path, roles["alpha"].path, original=True))
        elif "foreground" in roles:
            items.append(BatchItem(image_id, roles["foreground"].path, roles["alpha"].path))
        else:
            raise MatteKitError(f"manifest item {image_id!r} has neither original nor foreground")
    return items


def cmd_compose(args) -> int:
    items = batch_items(read_manifest(args.manifest))
    backgrounds = [(p.stem, str(p)) for p in io.list_images(args.bg_dir)]
    solver = SolverParams(cg_tolerance=args.cg_tolerance, cg_max_iters=args.cg_max_iters)
    results = compose_batch(
        items, backgrounds, args.seed, args.k, _gate_policy(args), args.noise_sigma, solver, args.workers
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    failed = 0
    with (out_dir / "recipes.jsonl").open("w", encoding="utf-8") as fh:
        for r in results:
            record = {"item_id": r.item_id, "k": r.k}
            if r.recipe is not None:
                record.update(r.recipe.as_record())
            if r.error is None:
                path = io.write_image(out_dir / f"{r.item_id}_{r.k}.png", r.composite)
                record["composite"] = path.name
                record["background_path"] = dict(backgrounds).get(r.recipe.background_id)
            else:
                failed += 1
                record["error"] = r.error
                log.error("compose item failed", extra={"fields": {"item_id": r.item_id, "k": r.k, "error": r.error}})
            fh.write(json.dumps(record) + "\n")
    _log("compose done", composites=len(results) - failed, failed=failed, out_dir=str(out_dir))
    return EXIT_PARTIAL if failed else EXIT_OK


def cmd_ingest(args) -> int:
    entries, errors = ingest_backgrounds(args.src_dir, args.out_dir, args.min_side, args.workers)
    write_manifest(args.manifest, entries)
    _log("ingest done", accepted=len(entries), rejected=len(errors), manifest=str(args.manifest))
    unreadable = [e for e in errors if not e.error.startswith("rejected")]
    if args.errors:
        with Path(args.errors).open("w", encoding="utf-8") as fh:
            for e in errors:
                fh.write(json.dumps(e.as_record()) + "\n")
    return EXIT_PARTIAL if unreadable else EXIT_OK


def cmd_dedup(args) -> int:
    entries = read_manifest(args.manifest)
    kept = dedup(entries, args.threshold, workers=args.workers)
    write_manifest(args.out, kept)
    _log("dedup done", before=len(entries), after=len(kept))
    return EXIT_OK


def cmd_split(args) -> int:
    out = split_backgrounds(read_manifest(args.manifest), args.train, args.val, args.seed)
    write_manifest(args.out, out)
    _log("split done", train=args.train, val=args.val, seed=args.seed)
    return EXIT_OK


def cmd_tracks(args) -> int:
    tracks = make_tracks(read_manifest(args.manifest), args.seed)
    out_dir = Path(args.out_dir)
    for name, entries in tracks.items():
        write_manifest(out_dir / f"{name}.jsonl", entries)
    _log("tracks done", **{name: len(e) for name, e in tracks.items()})
    return EXIT_OK


def cmd_sample_bg(args) -> int:
    pool = read_manifest(args.manifest)
    if args.foregrounds:
        fg_ids = list(group_by_id(read_manifest(args.foregrounds)))
    else:
        fg_ids = [str(i) for i in range(args.n)]
    table = sample_backgrounds(pool, len(fg_ids), args.k, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        for fg_id, row in zip(fg_ids, table):
            fh.write(json.dumps({"foreground": fg_id, "backgrounds": row}) + "\n")
    _log("sample-bg done", rows=len(table), k=args.k, seed=args.seed)
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file (or set MATTEKIT_CONFIG)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--workers", type=int, default=_default_workers())
    common.add_argument("--log-level", default="INFO")

    parser = _Parser(prog="mattekit", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        sp = subs.add_parser(name, parents=[common], help=help_text)
        sp.set_defaults(func=func)
        return sp

    sp = add("rosta", cmd_rosta, "supervision trimap / mask from an alpha matte")
    sp.add_argument("--kind", type=str.lower, choices=["tt", "ft", "bt"], required=True)
    sp.add_argument("--kernel", type=int, default=None, help="default 25 for tt, 50 for ft/bt")
    sp.add_argument("--delta", type=float, default=rosta.DELTA)
    sp.add_argument("--alpha", required=True)
    sp.add_argument("--out", required=True)

    sp = add("compose", cmd_compose, "seeded composition of foregrounds over backgrounds")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--bg-dir", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--noise-sigma", type=float, default=10.0)
    sp.add_argument("--no-denoise", action="store_true")
    sp.add_argument("--no-blur", action="store_true")
    sp.add_argument("--no-noise", action="store_true")
    sp.add_argument("--force-all", action="store_true")
    sp.add_argument("--cg-tolerance", type=float, default=1e-5)
    sp.add_argument("--cg-max-iters", type=int, default=2000)

    sp = add("merge", cmd_merge, "collaborative merge of glance and focus outputs")
    sp.add_argument("--kind", type=str.lower, choices=["tt", "ft", "bt"], required=True)
    sp.add_argument("--glance", required=True, help=".npy probability map or trimap PNG")
    sp.add_argument("--focus", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--bits", type=int, choices=[8, 16], default=8)

    sp = add("ensemble", cmd_ensemble, "per-pixel median of three mattes")
    sp.add_argument("--inputs", nargs=3, required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--bits", type=int, choices=[8, 16], default=8)

    sp = add("hybrid", cmd_hybrid, "hybrid-resolution replacement")
    sp.add_argument("--initial", required=True, help="alpha from the d1 pass")
    sp.add_argument("--transition", required=True, help="transition mask or trimap from the d1 pass")
    sp.add_argument("--transition-format", choices=["trimap", "mask"], default="trimap",
                    help="trimap: 128 marks transition; mask: >=128 marks transition")
    sp.add_argument("--focus", required=True, help="focus alpha from the d2 pass")
    sp.add_argument("--reference", help="full-resolution image giving the output size")
    sp.add_argument("--width", type=int)
    sp.add_argument("--height", type=int)
    sp.add_argument("--d1", default="1/3")
    sp.add_argument("--d2", default="1/2")
    sp.add_argument("--out", required=True)
    sp.add_argument("--bits", type=int, choices=[8, 16], default=8)

    sp = add("eval", cmd_eval, "matting metrics over a directory pair")
    sp.add_argument("--pred-dir", required=True)
    sp.add_argument("--gt-dir", required=True)
    sp.add_argument("--trimap-dir")
    sp.add_argument("--out", required=True)

    sp = add("losses", cmd_losses, "reference loss values")
    sp.add_argument("--pred", required=True, help="merged alpha prediction")
    sp.add_argument("--gt", required=True)
    sp.add_argument("--trimap", required=True)
    sp.add_argument("--kind", type=str.lower, choices=["tt", "ft", "bt"], default="tt")
    sp.add_argument("--focus")
    sp.add_argument("--glance")
    sp.add_argument("--fg")
    sp.add_argument("--bg")
    sp.add_argument("--lambda1", type=float, default=0.25)
    sp.add_argument("--lambda2", type=float, default=0.25)
    sp.add_argument("--lambda3", type=float, default=0.25)
    sp.add_argument("--out")

    sp = add("ingest", cmd_ingest, "filter and normalise a background directory")
    sp.add_argument("--src-dir", required=True)
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--min-side", type=int, default=1080)
    sp.add_argument("--errors", help="write per-file rejection records here")

    sp = add("dedup", cmd_dedup, "remove near-duplicate images")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--threshold", type=int, default=4)

    sp = add("split", cmd_split, "seeded train/val split of backgrounds")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--train", type=int, default=15000)
    sp.add_argument("--val", type=int, default=5000)

    sp = add("tracks", cmd_tracks, "per-category ORI / COMP track manifests")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--out-dir", required=True)

    sp = add("sample-bg", cmd_sample_bg, "K distinct backgrounds per foreground")
    sp.add_argument("--manifest", required=True, help="background manifest")
    sp.add_argument("--foregrounds", help="foreground manifest (rows keyed by id)")
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--k", type=int, default=5)
    sp.add_argument("--out", required=True)

    return parser


def _find_command(parser: argparse.ArgumentParser, argv: list[str]):
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    for token in argv:
        if token in sub_action.choices:
            return token, sub_action.choices[token]
    return None, None


def run(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        command, sub = _find_command(parser, argv)
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        cfg_path = config_path(known.config)
        applied = {}
        if sub is not None:
            applied = apply_config(sub, load_config(cfg_path), command)
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, FileNotFoundError) as exc:
        print(f"mattekit: error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    setup_logging(args.log_level)
    effective = {k: v for k, v in vars(args).items() if k != "func"}
    _log("effective config", config_file=str(cfg_path) if cfg_path else None, from_config=applied, args=effective)
    try:
        return args.func(args)
    except UsageError as exc:
        log.error(str(exc))
        return EXIT_INVALID
    except (MatteKitError, FileNotFoundError, ValueError) as exc:
        log.error(f"{type(exc).__name__}: {exc}")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
