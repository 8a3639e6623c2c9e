"""Command-line pipeline.

Stages compose through files only::

    tiestrength synth --out data --seed 7
    tiestrength clean --in data --out clean
    tiestrength fit --in clean --out model
    tiestrength train-rf --in clean --out model --trees 500
    tiestrength survey-weights --out model
    tiestrength assemble --out model --variant rf-p
    tiestrength tune-k --in clean --out model
    tiestrength evaluate --in clean --out model --weights model/weights_tuned.json

Model artifacts (normalization, importances, p, weights) accumulate in the
``--out`` directory, which later stages also read from.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import published
from .errors import LoadError, TieStrengthError
from .evaluation import PairEvaluator, predict_better_friend
from .forest import ForestConfig, oob_permutation_importance, train_forest
from .ingest import (
    CLASSIFICATIONS_CSV,
    INTERACTIONS_CSV,
    PAIRS_CSV,
    CleaningConfig,
    clean_passive_users,
    drop_unallocated,
    drop_undecided,
    load_classifications,
    load_interactions,
    load_pairs,
    percentile,
    restrict_to_egos,
    sum_by_ego,
    write_classifications,
    write_interactions,
    write_pairs,
)
from .model import ParameterManifest, Variant, feature_index
from .normalize import NormalizationParams, apply_minmax_matrix, fit_minmax
from .regression import SUBGROUP_TARGET, fit_ols, lr_importances, subgroup_targets
from .scoring import (
    assemble_weight_table,
    friendship_weight,
    load_weight_table,
    save_weight_table,
    score_records,
    write_scores,
)
from .survey import SurveyTally, survey_fractions
from .synth import MANIFEST_JSON, SynthConfig, generate, write_synth
from .tuning import DEFAULT_K_GRID, tune_all

log = logging.getLogger("tiestrength")

NORMALIZATION_JSON = "normalization.json"
IMPORTANCES_JSON = {"lr": "importances_lr.json", "rf": "importances_rf.json"}
P_JSON = "p.json"
WEIGHTS_JSON = "weights.json"
TUNED_WEIGHTS_JSON = "weights_tuned.json"
TUNING_REPORT_JSON = "tuning_report.json"
REMOVAL_REPORT_JSON = "removal_report.json"
REPORT_JSON = "report.json"
LEDGER_CSV = "ledger.csv"
SCORES_CSV = "scores.csv"

# Label order for the forest; vote ties go to the closer subgroup.
FOREST_CLASSES = ("best_friend", "friend", "acquaintance")


class StageError(TieStrengthError):
    pass


def _write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _read_json(path, what):
    path = Path(path)
    if not path.exists():
        raise StageError(f"missing artifact {path.name} ({what}) at {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise LoadError(f"{path}: invalid JSON: {exc}") from None


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise StageError(f"missing artifact {path.name} ({what}) at {path}")
    return path


def _manifest(args) -> ParameterManifest:
    if args.manifest:
        return ParameterManifest.load(args.manifest)
    if getattr(args, "in_dir", None):
        candidate = Path(args.in_dir) / MANIFEST_JSON
        if candidate.exists():
            return ParameterManifest.load(candidate)
    return published.manifest()


def _out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _in(args) -> Path:
    if not args.in_dir:
        raise StageError("--in is required")
    d = Path(args.in_dir)
    if not d.is_dir():
        raise StageError(f"input directory {d} does not exist")
    return d


def _load_norm(args) -> NormalizationParams:
    path = Path(args.norm) if getattr(args, "norm", None) else Path(args.out) / NORMALIZATION_JSON
    return NormalizationParams.load(_require(path, "run `fit` first"))


def _load_weights(args, default=WEIGHTS_JSON):
    path = Path(args.weights) if args.weights else Path(args.out) / default
    return load_weight_table(_require(path, "run `assemble` or `tune-k` first"))


def parse_k_grid(text: str) -> tuple[float, ...]:
    """'1-100,150,200' -> (1, 2, ..., 100, 150, 200)."""
    ks = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            ks.extend(range(int(a), int(b) + 1))
        else:
            ks.append(float(part))
    return tuple(sorted(set(float(k) for k in ks)))


def _training_rows(in_dir: Path, manifest, norm):
    records = load_interactions(in_dir / INTERACTIONS_CSV, manifest)
    classes = drop_unallocated(load_classifications(in_dir / CLASSIFICATIONS_CSV))
    feats = feature_index(records)
    rows = [c for c in classes if (c.ego_id, c.friend_id) in feats]
    if len(rows) < len(classes):
        log.warning("%d classified friends have no interaction row and are skipped", len(classes) - len(rows))
    if not rows:
        raise StageError("no classified friend has an interaction row")
    X = np.array([feats[(c.ego_id, c.friend_id)] for c in rows], dtype=float)
    return apply_minmax_matrix(X, norm), [c.subgroup for c in rows]


# --- stages ---------------------------------------------------------------


def cmd_synth(args) -> None:
    manifest = ParameterManifest.load(args.manifest) if args.manifest else published.manifest()
    cfg = SynthConfig(
        n_egos=args.egos,
        friends_per_ego=args.friends,
        seed=args.seed,
        manifest=manifest,
        pair_noise=args.pair_noise,
        pairs_per_ego=args.pairs_per_ego,
        passive_fraction=args.passive_fraction,
    )
    data = generate(cfg)
    write_synth(data, _out(args))
    print(f"synth: {len(data.interactions)} interaction rows, {len(data.pairs)} pairs, "
          f"{len(data.passive_egos)} passive egos -> {args.out}")


def cmd_clean(args) -> None:
    in_dir, out = _in(args), _out(args)
    manifest = _manifest(args)
    cfg = CleaningConfig(message_threshold=args.message_threshold, other_threshold=args.other_threshold,
                         message_parameter=args.message_parameter)
    records = load_interactions(in_dir / INTERACTIONS_CSV, manifest)
    kept, removed = clean_passive_users(records, manifest, cfg)
    egos = {r.ego_id for r in kept}
    classes = load_classifications(in_dir / CLASSIFICATIONS_CSV)
    pairs = load_pairs(in_dir / PAIRS_CSV)
    classes_kept = drop_unallocated(restrict_to_egos(classes, egos))
    pairs_kept = drop_undecided(restrict_to_egos(pairs, egos))

    manifest.save(out / MANIFEST_JSON)
    write_interactions(out / INTERACTIONS_CSV, kept, manifest)
    write_classifications(out / CLASSIFICATIONS_CSV, classes_kept)
    write_pairs(out / PAIRS_CSV, pairs_kept)

    sums = sum_by_ego(records)
    diag = {}
    if sums:
        for i, name in enumerate(manifest.names):
            diag[name] = percentile([s[i] for s in sums.values()], cfg.percentile_q)
    _write_json(out / REMOVAL_REPORT_JSON, {
        "message_parameter": cfg.message_parameter,
        "message_threshold": cfg.message_threshold,
        "other_threshold": cfg.other_threshold,
        "removed_egos": removed,
        "rows": {"interactions": [len(records), len(kept)], "classifications": [len(classes), len(classes_kept)],
                 "pairs": [len(pairs), len(pairs_kept)]},
        "per_ego_sum_percentile": {"q": cfg.percentile_q, "values": diag},
    })
    print(f"clean: removed {len(removed)} passive egos; {len(kept)} interaction rows, "
          f"{len(classes_kept)} classifications, {len(pairs_kept)} pairs kept")


def cmd_fit(args) -> None:
    in_dir, out = _in(args), _out(args)
    manifest = _manifest(args)
    params = fit_minmax(load_interactions(in_dir / INTERACTIONS_CSV, manifest), manifest)
    params.save(out / NORMALIZATION_JSON)
    print(f"fit: normalization for {len(params)} parameters -> {out / NORMALIZATION_JSON}")


def cmd_train_lr(args) -> None:
    in_dir, out = _in(args), _out(args)
    manifest = _manifest(args)
    X, labels = _training_rows(in_dir, manifest, _load_norm(args))
    fit = fit_ols(X, subgroup_targets(labels))
    imp = lr_importances(fit)
    _write_json(out / IMPORTANCES_JSON["lr"], {
        "method": "lr",
        "target_encoding": SUBGROUP_TARGET,
        "n_observations": fit.n_observations,
        "intercept": float(fit.coefficients[0]),
        "parameters": [
            {"name": n, "importance": float(i), "t_value": float(t), "coefficient": float(b),
             "standard_error": float(se)}
            for n, i, t, b, se in zip(manifest.names, imp, fit.t_values[1:], fit.coefficients[1:],
                                      fit.standard_errors[1:])
        ],
    })
    print("train-lr: " + ", ".join(f"{n}={v:.3f}" for n, v in zip(manifest.names, imp)))


def cmd_train_rf(args) -> None:
    in_dir, out = _in(args), _out(args)
    manifest = _manifest(args)
    X, labels = _training_rows(in_dir, manifest, _load_norm(args))
    cfg = ForestConfig(n_trees=args.trees, mtry=args.mtry, seed=args.seed,
                       importance_scaling=args.importance_scaling)
    forest = train_forest(X, labels, cfg, classes=FOREST_CLASSES)
    imp = oob_permutation_importance(forest, X, labels)
    _write_json(out / IMPORTANCES_JSON["rf"], {
        "method": "rf",
        "scaling": imp.scaling,
        "config": {"n_trees": cfg.n_trees, "mtry": cfg.check(X.shape[1]), "seed": cfg.seed,
                   "min_leaf_size": cfg.min_leaf_size, "max_depth": cfg.max_depth},
        "classes": list(forest.class_labels),
        "oob_accuracy": forest.oob_accuracy(X, forest.encode(labels)),
        "parameters": [
            {"name": n, "importance": float(m), "raw": float(r)}
            for n, m, r in zip(manifest.names, imp.mean_decrease_accuracy, imp.raw)
        ],
    })
    print("train-rf: " + ", ".join(f"{n}={v:.2f}" for n, v in zip(manifest.names, imp.mean_decrease_accuracy)))


def cmd_survey_weights(args) -> None:
    out = _out(args)
    manifest = _manifest(args)
    tally = SurveyTally.load(args.survey) if args.survey else published.survey_tally()
    fr = survey_fractions(tally, manifest)
    _write_json(out / P_JSON, {
        "parameters": [{"name": n, "p": float(f), "exact": str(f)} for n, f in zip(manifest.names, fr)],
    })
    print("survey-weights: " + ", ".join(f"{n}={float(f):.4f}" for n, f in zip(manifest.names, fr)))


def cmd_assemble(args) -> None:
    out = _out(args)
    manifest = _manifest(args)
    variant = Variant.parse(args.variant)
    method = "lr" if variant is Variant.LR else "rf"
    imp_data = _read_json(out / IMPORTANCES_JSON[method], f"run `train-{method}` first")
    imp = {e["name"]: e["importance"] for e in imp_data["parameters"]}
    missing = [n for n in manifest.names if n not in imp]
    if missing:
        raise StageError(f"importances lack parameters {missing}")
    p = None
    if variant in (Variant.RF_P, Variant.RF_P_K):
        p_data = _read_json(out / P_JSON, "run `survey-weights` first")
        pm = {e["name"]: e["p"] for e in p_data["parameters"]}
        p = [pm[n] for n in manifest.names]
    k = None
    if args.k_values:
        k = [float(v) for v in args.k_values.split(",")]
    table = assemble_weight_table(manifest.names, [imp[n] for n in manifest.names], p, k, variant)
    save_weight_table(out / WEIGHTS_JSON, table, {"importance_source": IMPORTANCES_JSON[method]})
    print(f"assemble: {variant.value} -> {out / WEIGHTS_JSON}")


def cmd_tune_k(args) -> None:
    in_dir, out = _in(args), _out(args)
    manifest = _manifest(args)
    base = _load_weights(args)
    base.check_manifest(manifest)
    norm = _load_norm(args)
    records = load_interactions(in_dir / INTERACTIONS_CSV, manifest)
    pairs = drop_undecided(load_pairs(in_dir / PAIRS_CSV))
    grid = parse_k_grid(args.k_grid) if args.k_grid else DEFAULT_K_GRID
    evaluator = PairEvaluator(pairs, feature_index(records), norm)
    result = tune_all(base, k_grid=grid, accuracy_fn=evaluator.accuracy_excluding_ties)
    save_weight_table(out / TUNED_WEIGHTS_JSON, result.table, {"tuned_from": WEIGHTS_JSON})
    result.save(out / TUNING_REPORT_JSON)
    print("tune-k: " + ", ".join(f"{n}={k:g}" for n, k in zip(result.table.names, result.table.k)))


def cmd_score(args) -> None:
    in_dir, out = _in(args), _out(args)
    manifest = _manifest(args)
    table = _load_weights(args)
    table.check_manifest(manifest)
    norm = _load_norm(args)
    scores = score_records(load_interactions(in_dir / INTERACTIONS_CSV, manifest), table, norm)
    write_scores(out / SCORES_CSV, scores)
    print(f"score: {len(scores)} rows -> {out / SCORES_CSV}")


def cmd_evaluate(args) -> None:
    in_dir, out = _in(args), _out(args)
    manifest = _manifest(args)
    table = _load_weights(args)
    table.check_manifest(manifest)
    norm = _load_norm(args)
    records = load_interactions(in_dir / INTERACTIONS_CSV, manifest)
    pairs = drop_undecided(load_pairs(in_dir / PAIRS_CSV))
    report = PairEvaluator(pairs, feature_index(records), norm).report(table)
    report.save(out / REPORT_JSON, out / LEDGER_CSV)
    print(f"evaluate: {report.matches}/{report.decided_pairs} decided pairs "
          f"({report.accuracy_excluding_ties:.2%}), {report.matches}/{report.total_pairs} all pairs "
          f"({report.accuracy_full:.2%}), {report.tie_pairs} ties")


def cmd_demo_paper(args) -> None:
    ex = published.worked_example()
    table = published.final_table()
    first, second = ex["pair"]
    w1 = friendship_weight(ex["friends"][first], table)
    w2 = friendship_weight(ex["friends"][second], table)
    pred = predict_better_friend(w1, w2)
    rep = ex["reported_weight"]
    print("final model (MeanDecreaseAccuracy x p x k), published coefficient tables")
    print(f"weight({ex['ego']}, {first}) = {w1:.5f}  (reported {rep[first]})")
    print(f"weight({ex['ego']}, {second}) = {w2:.5f}  (reported {rep[second]})")
    print(f"prediction: {pred}  stated: {ex['stated']}  match: {pred == ex['stated']}")


# --- argument parsing -----------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tiestrength", description="Friendship-intensity scoring pipeline")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text, *, needs_in=True):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--manifest", help="parameter manifest JSON (default: <in>/manifest.json or the built-in one)")
        if needs_in:
            p.add_argument("--in", dest="in_dir", required=True, help="input table directory")
        p.add_argument("--out", required=True, help="output / model artifact directory")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("synth", cmd_synth, "generate a synthetic dataset", needs_in=False)
    p.add_argument("--egos", type=int, default=50)
    p.add_argument("--friends", type=int, default=30)
    p.add_argument("--pairs-per-ego", type=int, default=20)
    p.add_argument("--pair-noise", type=float, default=0.1)
    p.add_argument("--passive-fraction", type=float, default=0.1)

    p = add("clean", cmd_clean, "drop passive egos, unallocated friends and undecided pairs")
    p.add_argument("--message-threshold", type=float, default=CleaningConfig.message_threshold)
    p.add_argument("--other-threshold", type=float, default=CleaningConfig.other_threshold)
    p.add_argument("--message-parameter", default=CleaningConfig.message_parameter)

    add("fit", cmd_fit, "fit min-max normalization")

    for name, func in (("train-lr", cmd_train_lr), ("train-rf", cmd_train_rf)):
        p = add(name, func, f"importances via {'OLS |t|' if name == 'train-lr' else 'random forest'}")
        p.add_argument("--norm", help=f"normalization params (default <out>/{NORMALIZATION_JSON})")
    p.add_argument("--trees", type=int, default=500)
    p.add_argument("--mtry", type=int, default=None)
    p.add_argument("--importance-scaling", choices=("raw", "z_scaled"), default="z_scaled")

    p = add("survey-weights", cmd_survey_weights, "p vector from survey tallies", needs_in=False)
    p.add_argument("--survey", help="survey.json (default: built-in published tallies)")

    p = add("assemble", cmd_assemble, "write weights.json for a model variant", needs_in=False)
    p.add_argument("--variant", choices=("lr", "rf", "rf-p", "rf-p-k"), default="rf-p")
    p.add_argument("--k-values", help="comma-separated k per parameter (rf-p-k only)")

    for name, func, help_text in (
        ("tune-k", cmd_tune_k, "one-at-a-time k sweep"),
        ("score", cmd_score, "write scores.csv"),
        ("evaluate", cmd_evaluate, "better-friend-in-pair accuracy"),
    ):
        p = add(name, func, help_text)
        p.add_argument("--weights", help=f"weight table (default <out>/{WEIGHTS_JSON})")
        p.add_argument("--norm", help=f"normalization params (default <out>/{NORMALIZATION_JSON})")
        if name == "tune-k":
            p.add_argument("--k-grid", help="e.g. '1-100,150,200,500,1000' (the default)")

    p = sub.add_parser("demo-paper", help="score the published two-friend worked example")
    p.set_defaults(func=cmd_demo_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        args.func(args)
    except (TieStrengthError, ValueError, OSError) as exc:
        print(f"tiestrength {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
