"""Command-line interface binding the pipeline stages end to end.

Subcommands mirror the pipeline: phantom, ensemble, postprocess, evaluate,
review, features, survive, report.  Every subcommand accepts --config,
--seed, --threads and --out; all randomness flows from --seed and outputs are
byte-identical at any thread count.
"""

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .cohort import (
    FeatureTable,
    read_feature_table,
    read_manifest,
    write_feature_table,
)
from .evaluate import cohort_stats, evaluate_case, mean_volume_ratio, simulate_review
from .features import extract_all, render_catalog
from .grid import LabelMask
from .learn import (
    SearchSpace,
    cross_validate,
    dichotomize_survival,
    fit_forest,
    join_feature_tables,
    random_search,
    welch_t_test,
    with_seed,
)
from .nrrdio import read_nrrd, write_nrrd
from .postproc import binarize, connected_components, ensemble_average, rank_by_volume
from .report import (
    accuracy_bars,
    dice_histogram,
    merge_reports,
    pvalue_heatmap,
    render_merged_figures,
    write_csv,
    write_json,
)
from .runconfig import RunConfig, config_with_seed, load_config
from .synth import PhantomSpec, gen_cohort


class CliError(RuntimeError):
    pass


def _add_common(parser: argparse.ArgumentParser, out_required: bool = True) -> None:
    parser.add_argument("--config", type=Path, default=None, help="TOML run configuration")
    parser.add_argument("--seed", type=int, default=0, help="seed controlling all randomness")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for per-case stages")
    parser.add_argument("--out", type=Path, required=out_required, help="output file or directory")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lesionpipe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a synthetic cohort")
    p.add_argument("--n", type=int, required=True, help="number of cases")
    p.add_argument("--frac-low-dice", type=float, default=0.0,
                   help="fraction of cases constructed below the review threshold")
    p.add_argument("--dims", type=int, nargs=3, default=None, help="grid size nx ny nz")
    p.add_argument("--spacing", type=float, nargs=3, default=None, help="voxel spacing mm")
    p.add_argument("--volume-range", type=float, nargs=2, default=None, help="lesion volume range cm^3")
    p.add_argument("--texture", choices=("uniform", "noisy", "shelled"), default=None)
    p.add_argument("--encoding", choices=("raw", "gzip"), default="gzip")
    _add_common(p)

    p = sub.add_parser("ensemble", help="average probability maps")
    p.add_argument("inputs", type=Path, nargs="+", help="probability NRRD files")
    _add_common(p)

    p = sub.add_parser("postprocess", help="components and volume-ranked candidate masks")
    p.add_argument("--input", type=Path, required=True, help="probability map or mask NRRD")
    p.add_argument("--kind", choices=("prob", "mask"), default="prob")
    _add_common(p)

    p = sub.add_parser("evaluate", help="per-case overlap metrics and the cohort report")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--pred", default=None, help="use only the named prediction input")
    p.add_argument("--post", choices=("none", "largest"), default="none",
                   help="apply largest-component post-processing before scoring")
    p.add_argument("--report", type=Path, default=None,
                   help="also write the report JSON to this exact path")
    _add_common(p, out_required=False)

    p = sub.add_parser("review", help="simulated review of ranked candidates")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--pred", default=None)
    _add_common(p)

    p = sub.add_parser("features", help="extract the 70-feature table to CSV")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--mask-source", choices=("ref", "pred", "review"), default="ref")
    p.add_argument("--pred", default=None)
    p.add_argument("--catalog", type=Path, default=None,
                   help="also write the feature catalog reference to this path")
    _add_common(p)

    p = sub.add_parser("survive", help="survival classification: cv, search or compare")
    p.add_argument("--manifest", type=Path, required=True, help="manifest carrying survival months")
    p.add_argument("--mode", choices=("cv", "search", "compare"), default="cv")
    p.add_argument("--features", type=Path, action="append", default=None,
                   help="feature CSV; repeat to concatenate tables column-wise (hybrid input)")
    p.add_argument("--table", action="append", default=None, metavar="NAME=PATH",
                   help="compare mode: labeled feature tables")
    _add_common(p)

    p = sub.add_parser("report", help="merge JSON reports and render figures")
    p.add_argument("inputs", type=Path, nargs="+", help="JSON reports to merge")
    _add_common(p)
    return parser


def _load_runconfig(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    return config_with_seed(cfg, args.seed)


def _case_pred_mask(case, cfg: RunConfig, pred_name: str | None) -> LabelMask:
    """Prediction mask for a case: named input, or the binarized ensemble."""
    preds = list(case.pred)
    if pred_name is not None:
        preds = [p for p in preds if p.name == pred_name]
        if not preds:
            raise CliError(f"case {case.case_id}: no prediction input named {pred_name!r}")
    if not preds:
        raise CliError(f"case {case.case_id}: manifest lists no prediction inputs")
    probs = [p for p in preds if p.kind == "prob"]
    masks = [p for p in preds if p.kind == "mask"]
    if probs:
        ensembled = ensemble_average([read_nrrd(p.path, "prob") for p in probs])
        return binarize(ensembled, cfg.threshold)
    if len(masks) == 1:
        return read_nrrd(masks[0].path, "mask")
    raise CliError(f"case {case.case_id}: several mask inputs; pick one with --pred")


def _map_cases(cases, worker, threads: int) -> list:
    """Apply worker to each case, optionally in a thread pool; order preserved."""
    if threads <= 1:
        return [worker(c) for c in cases]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, cases))


def _cmd_phantom(args) -> int:
    spec = PhantomSpec()
    overrides = {}
    if args.dims:
        overrides["dims"] = tuple(args.dims)
    if args.spacing:
        overrides["spacing"] = tuple(args.spacing)
    if args.volume_range:
        overrides["volume_range_cm3"] = tuple(args.volume_range)
    if args.texture:
        overrides["texture"] = args.texture
    overrides["fraction_low_dice"] = args.frac_low_dice
    from dataclasses import replace

    spec = replace(spec, **overrides)
    manifest = gen_cohort(args.n, spec, args.seed, args.out, encoding=args.encoding)
    print(manifest)
    return 0


def _cmd_ensemble(args) -> int:
    maps = [read_nrrd(p, "prob") for p in args.inputs]
    write_nrrd(ensemble_average(maps), args.out)
    return 0


def _cmd_postprocess(args) -> int:
    cfg = _load_runconfig(args)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "prob":
        mask = binarize(read_nrrd(args.input, "prob"), cfg.threshold)
    else:
        mask = read_nrrd(args.input, "mask")
    cs = connected_components(mask, cfg.connectivity)
    ranked = rank_by_volume(cs)
    for rank, m in enumerate(ranked, start=1):
        write_nrrd(m, out / f"rank{rank:02d}.nrrd")
    doc = {
        "config_hash": cfg.digest(),
        "connectivity": cfg.connectivity,
        "threshold": cfg.threshold,
        "n_components": len(cs),
        "components": [
            {
                "id": c.id,
                "voxel_count": c.voxel_count,
                "volume_mm3": c.volume_mm3,
                "first_index": c.first_index,
                "mask": f"rank{c.id:02d}.nrrd",
            }
            for c in cs.components
        ],
    }
    write_json(doc, out / "components.json")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _load_runconfig(args)
    manifest = read_manifest(args.manifest, validate_paths=True)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    def worker(case):
        pred = _case_pred_mask(case, cfg, args.pred)
        if args.post == "largest":
            from .postproc import largest_component

            pred = largest_component(pred, cfg.connectivity)
        ref = read_nrrd(case.ref_mask, "mask")
        return evaluate_case(case.case_id, pred, ref)

    evals = _map_cases(manifest.cases, worker, args.threads)
    evals.sort(key=lambda e: e.case_id)
    report = cohort_stats(evals)
    doc = {
        "config_hash": cfg.digest(),
        "post": args.post,
        "cases": [e.to_json_dict() for e in evals],
        "cohort": report.to_json_dict(),
        "table_row": report.table_row(),
        "mean_volume_ratio": mean_volume_ratio(evals),
    }
    write_json(doc, out / "evaluation.json")
    write_csv(
        out / "cases.csv",
        ["case_id", "dice", "volume_ratio", "pred_volume_mm3", "ref_volume_mm3"],
        [[e.case_id, repr(e.dice), repr(e.volume_ratio), repr(e.pred_volume), repr(e.ref_volume)] for e in evals],
    )
    dice_histogram([e.dice for e in evals], out / "dice_histogram.png")
    print(report.table_row())
    return 0


def _cmd_review(args) -> int:
    cfg = _load_runconfig(args)
    manifest = read_manifest(args.manifest, validate_paths=True)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    def worker(case):
        pred = _case_pred_mask(case, cfg, args.pred)
        ref = read_nrrd(case.ref_mask, "mask")
        candidates = rank_by_volume(connected_components(pred, cfg.connectivity))
        outcome = simulate_review(candidates, ref, cfg.min_dice)
        return case.case_id, outcome

    outcomes = sorted(_map_cases(manifest.cases, worker, args.threads), key=lambda t: t[0])
    accepted = [(cid, o) for cid, o in outcomes if o.status == "accepted"]
    doc = {
        "config_hash": cfg.digest(),
        "min_dice": cfg.min_dice,
        "n_total": len(outcomes),
        "n_accepted": len(accepted),
        "outcomes": [
            {
                "case_id": cid,
                "status": o.status,
                "reason": o.reason,
                "selected_rank": None if o.selected_component is None else o.selected_component[0],
                "selected_dice": None if o.selected_component is None else o.selected_component[1],
            }
            for cid, o in outcomes
        ],
    }
    if accepted:
        dices = [o.selected_component[1] for _, o in accepted]
        doc["accepted_mean_dice"] = float(np.mean(dices))
        doc["accepted_std_dice"] = float(np.std(dices, ddof=1)) if len(dices) > 1 else 0.0
        dice_histogram(dices, out / "accepted_dice_histogram.png", min_dice=cfg.min_dice,
                       title="Overlap of accepted candidates")
    write_json(doc, out / "review.json")
    write_csv(
        out / "review.csv",
        ["case_id", "status", "reason", "selected_rank", "selected_dice"],
        [
            [
                cid,
                o.status,
                o.reason,
                "" if o.selected_component is None else o.selected_component[0],
                "" if o.selected_component is None else repr(o.selected_component[1]),
            ]
            for cid, o in outcomes
        ],
    )
    print(f"accepted {len(accepted)}/{len(outcomes)} cases")
    return 0


def _reviewed_mask(case, cfg: RunConfig, pred_name: str | None) -> LabelMask | None:
    pred = _case_pred_mask(case, cfg, pred_name)
    ref = read_nrrd(case.ref_mask, "mask")
    candidates = rank_by_volume(connected_components(pred, cfg.connectivity))
    outcome = simulate_review(candidates, ref, cfg.min_dice)
    if outcome.status != "accepted":
        return None
    return candidates[outcome.selected_component[0]]


def _cmd_features(args) -> int:
    cfg = _load_runconfig(args)
    if args.catalog:
        args.catalog.parent.mkdir(parents=True, exist_ok=True)
        with open(args.catalog, "w", encoding="utf-8", newline="") as fh:
            fh.write(render_catalog())
    manifest = read_manifest(args.manifest, validate_paths=True)

    def worker(case):
        image = read_nrrd(case.image, "image")
        if args.mask_source == "ref":
            mask = read_nrrd(case.ref_mask, "mask")
        elif args.mask_source == "pred":
            mask = _case_pred_mask(case, cfg, args.pred)
        else:
            mask = _reviewed_mask(case, cfg, args.pred)
            if mask is None:
                return case.case_id, None
        return case.case_id, extract_all(image, mask, cfg.extract)

    results = sorted(_map_cases(manifest.cases, worker, args.threads), key=lambda t: t[0])
    skipped = [cid for cid, fv in results if fv is None]
    rows = [(cid, fv) for cid, fv in results if fv is not None]
    if not rows:
        raise CliError("no case produced features (all rejected by review?)")
    table = FeatureTable.from_feature_vectors(rows)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_feature_table(table, args.out)
    meta = {
        "config_hash": cfg.digest(),
        "mask_source": args.mask_source,
        "n_cases": len(rows),
        "skipped_cases": skipped,
        "n_slices_used": {cid: fv.n_slices_used for cid, fv in rows},
        "degenerate": {cid: sorted(fv.degenerate) for cid, fv in rows if fv.degenerate},
    }
    write_json(meta, args.out.with_suffix(".meta.json"))
    return 0


def _survival_labels(manifest, case_ids) -> list:
    months = []
    for cid in case_ids:
        case = manifest.by_id(cid)
        if case.survival_months is None:
            raise CliError(f"case {cid} has no survival_months in the manifest")
        months.append(case.survival_months)
    return dichotomize_survival(months)


def _cmd_survive(args) -> int:
    cfg = _load_runconfig(args)
    manifest = read_manifest(args.manifest)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)

    if args.mode == "compare":
        if not args.table or len(args.table) < 2:
            raise CliError("compare mode needs at least two --table NAME=PATH entries")
        named = []
        for spec_str in args.table:
            name, _, path = spec_str.partition("=")
            if not path:
                raise CliError(f"--table expects NAME=PATH, got {spec_str!r}")
            named.append((name, read_feature_table(path)))
        results = []
        for name, table in named:
            y = np.array(_survival_labels(manifest, table.case_ids()))
            res = cross_validate(table.matrix(), y, cfg.forest, k=cfg.cv_folds, seed=args.seed)
            results.append((name, res))
        labels = [name for name, _ in results]
        k = len(results)
        pmat = [[1.0] * k for _ in range(k)]
        for i in range(k):
            for j in range(k):
                if i != j:
                    pmat[i][j] = welch_t_test(
                        list(results[i][1].fold_accuracies), list(results[j][1].fold_accuracies)
                    ).p
        doc = {
            "config_hash": cfg.digest(),
            "seed": args.seed,
            "labels": labels,
            "accuracies": {name: res.mean for name, res in results},
            "fold_accuracies": {name: list(res.fold_accuracies) for name, res in results},
            "p_values": pmat,
        }
        write_json(doc, out / "compare.json")
        write_csv(out / "pvalues.csv", ["table"] + labels,
                  [[labels[i]] + [repr(v) for v in pmat[i]] for i in range(k)])
        write_csv(out / "accuracies.csv", ["table", "mean_accuracy"],
                  [[name, repr(res.mean)] for name, res in results])
        pvalue_heatmap(pmat, labels, out / "pvalue_heatmap.png")
        accuracy_bars(labels, [res.mean for _, res in results], out / "accuracy_bars.png")
        print("\n".join(f"{name}: {res.mean:.3f}" for name, res in results))
        return 0

    if not args.features:
        raise CliError("cv/search modes need at least one --features CSV")
    tables = [read_feature_table(p) for p in args.features]
    table = join_feature_tables(tables)
    X = table.matrix()
    y = np.array(_survival_labels(manifest, table.case_ids()))

    if args.mode == "cv":
        res, oof_pred, oof_frac1, oof_fold = cross_validate(
            X, y, cfg.forest, k=cfg.cv_folds, seed=args.seed, return_predictions=True
        )
        model = fit_forest(X, y, with_seed(cfg.forest, args.seed), feature_names=table.columns)
        model.save(out / "model.json")
        doc = {
            "config_hash": cfg.digest(),
            "seed": args.seed,
            "k": cfg.cv_folds,
            "fold_accuracies": list(res.fold_accuracies),
            "mean_accuracy": res.mean,
            "n_cases": int(y.size),
            "class_counts": [int(np.sum(y == 0)), int(np.sum(y == 1))],
        }
        write_json(doc, out / "cv.json")
        write_csv(out / "fold_accuracies.csv", ["fold", "accuracy"],
                  [[i, repr(a)] for i, a in enumerate(res.fold_accuracies)])
        write_csv(
            out / "oof_predictions.csv",
            ["case_id", "fold", "label", "prediction", "vote_frac_1"],
            [
                [cid, int(oof_fold[i]), int(y[i]), int(oof_pred[i]), repr(float(oof_frac1[i]))]
                for i, cid in enumerate(table.case_ids())
            ],
        )
        print(f"mean accuracy {res.mean:.3f} over {cfg.cv_folds} folds")
        return 0

    # search
    space = SearchSpace(n_samples=cfg.n_search)
    ranked = random_search(X, y, space, n=cfg.n_search, k=cfg.cv_folds, seed=args.seed,
                           base_params=cfg.forest)
    doc = {
        "config_hash": cfg.digest(),
        "seed": args.seed,
        "n_evaluated": len(ranked),
        "ranking": [
            {
                "rank": i + 1,
                "n_trees": p.n_trees,
                "ccp_alpha": p.ccp_alpha,
                "max_features": p.max_features,
                "mean_accuracy": r.mean,
                "fold_accuracies": list(r.fold_accuracies),
            }
            for i, (p, r) in enumerate(ranked)
        ],
    }
    write_json(doc, out / "search.json")
    write_csv(
        out / "search.csv",
        ["rank", "n_trees", "ccp_alpha", "max_features", "mean_accuracy"],
        [[i + 1, p.n_trees, repr(p.ccp_alpha), p.max_features, repr(r.mean)] for i, (p, r) in enumerate(ranked)],
    )
    best_p, best_r = ranked[0]
    print(f"best: n_trees={best_p.n_trees} ccp_alpha={best_p.ccp_alpha:.4g} accuracy={best_r.mean:.3f}")
    return 0


def _cmd_report(args) -> int:
    out: Path = args.out
    out.parent.mkdir(parents=True, exist_ok=True)
    merged = merge_reports(args.inputs)
    write_json(merged, out)
    render_merged_figures(merged, out.parent)
    return 0


_COMMANDS = {
    "phantom": _cmd_phantom,
    "ensemble": _cmd_ensemble,
    "postprocess": _cmd_postprocess,
    "evaluate": _cmd_evaluate,
    "review": _cmd_review,
    "features": _cmd_features,
    "survive": _cmd_survive,
    "report": _cmd_report,
}


def run_cli(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except (CliError, ValueError, OSError, KeyError) as exc:
        print(f"lesionpipe: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
