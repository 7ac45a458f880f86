"""Command-line entry point.

Subcommands mirror the workflow stages: ingest raw contracts, generate
best-worst 4-tuple designs, aggregate an annotation log into Bradley-Terry
scores and a reliability report, build summaries, evaluate them against
references, and serve the annotation UI.

Every flag can also be supplied through the environment as CLAUSERANK_<FLAG>
(e.g. CLAUSERANK_SEED=7); explicit flags win. All commands are deterministic
given their inputs and seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bws, categorize, corpus, pipeline
from .btrank import PairwiseComparison, ScoreTable, fit_bradley_terry
from .errors import ClauserankError, InsufficientAnnotations
from .rankers import RANKER_NAMES

log = logging.getLogger(__name__)

ENV_PREFIX = "CLAUSERANK_"


def _env(name: str, default=None):
    return os.environ.get(ENV_PREFIX + name.upper().replace("-", "_"), default)


def _load_config(path) -> corpus.CorpusConfig:
    if path:
        return corpus.CorpusConfig.from_json(path)
    return corpus.default_config()


def _read_sentence_files(path) -> dict[str, list[dict]]:
    """Sentence JSONL records grouped by contract, from a file or directory."""
    p = Path(path)
    files = sorted(p.glob("*.jsonl")) if p.is_dir() else [p]
    if not files:
        raise ClauserankError(f"no sentence files under {path}")
    by_contract: dict[str, list[dict]] = {}
    for f in files:
        with open(f, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                by_contract.setdefault(rec["contract_id"], []).append(rec)
    for recs in by_contract.values():
        recs.sort(key=lambda r: r["index"])
    return by_contract


def _contract_from_records(contract_id: str, records: list[dict], config: corpus.CorpusConfig) -> corpus.Contract:
    sentences = [
        corpus.Sentence(index=r["index"], text=r["text"], kept=r["kept"], filter_reason=r.get("filter_reason"))
        for r in records
    ]
    return corpus.Contract(id=contract_id, title="", sentences=sentences, parties=list(config.parties))


def _read_score_file(path) -> dict[str, dict[str, ScoreTable]]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    out: dict[str, dict[str, ScoreTable]] = {}
    for cid, parties in raw.items():
        out[cid] = {}
        for party, table in parties.items():
            scores = {int(k): float(v) for k, v in table["scores"].items()}
            out[cid][party] = ScoreTable(scores=scores, normalization=table["normalization"])
    return out


def _read_pairwise(path) -> list[PairwiseComparison]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(PairwiseComparison(rec["winner"], rec["loser"], float(rec.get("weight", 1.0))))
    return out


# --- subcommands -----------------------------------------------------------


def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    raw_dir = Path(args.raw_dir)
    files = sorted(raw_dir.glob("*.txt"))
    if not files:
        raise ClauserankError(f"no .txt contracts in {raw_dir}")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for f in files:
        contract = corpus.load_contract(f.read_text(encoding="utf-8"), config, contract_id=f.stem)
        contract = corpus.filter_sentences(contract, config.definitional_patterns)
        out_path = out_dir / f"{f.stem}.jsonl"
        with open(out_path, "w", encoding="utf-8") as fh:
            for rec in corpus.sentences_to_records(contract):
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        kept = len(contract.kept_sentences())
        print(f"{f.stem}: {len(contract.sentences)} sentences, {kept} kept -> {out_path}")
    return 0


def cmd_gen_tuples(args) -> int:
    config = _load_config(args.config)
    by_contract = _read_sentence_files(args.sentences)
    all_tuples = []
    group_index = 0
    for cid in sorted(by_contract):
        contract = _contract_from_records(cid, by_contract[cid], config)
        for party in config.parties:
            pool = [
                s.index
                for s in contract.kept_sentences()
                if corpus.detect_party_mentions(s, party)
            ]
            tuples = bws.generate_tuples(
                pool,
                factor=args.factor,
                min_occ=args.min_occ,
                seed=args.seed + group_index,
                contract_id=cid,
                party=party.canonical,
            )
            all_tuples.extend(tuples)
            print(f"{cid}/{party.canonical}: N={len(pool)} -> {len(tuples)} tuples")
            group_index += 1
    bws.write_tuples(all_tuples, args.out)
    print(f"wrote {len(all_tuples)} tuples -> {args.out}")
    return 0


def cmd_aggregate(args) -> int:
    tuples = bws.read_tuples(args.tuples)
    annotations = bws.read_annotations(args.log)
    if not annotations:
        raise ClauserankError(f"annotation log {args.log} is empty")
    by_id = {t.tuple_id: t for t in tuples}
    groups: dict[tuple[str, str], dict] = {}
    for t in tuples:
        groups.setdefault((t.contract_id, t.party), {"tuples": [], "annotations": []})["tuples"].append(t)
    for ann in annotations:
        t = by_id.get(ann.tuple_id)
        if t is None:
            raise ClauserankError(f"annotation references unknown tuple {ann.tuple_id}")
        groups[(t.contract_id, t.party)]["annotations"].append(ann)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores_out: dict[str, dict[str, dict]] = {}
    shr_out: dict[str, dict] = {}
    shr_means = []
    for (cid, party) in sorted(groups):
        g = groups[(cid, party)]
        if not g["annotations"]:
            continue
        pairs = bws.tuples_to_pairs(g["annotations"], g["tuples"])
        # consistent logs produce undefeated sentences whose anchored MLE sits
        # near the boundary; give the MM iteration room well past the default
        table = fit_bradley_terry(pairs, max_iter=500_000)
        scores_out.setdefault(cid, {})[party] = {
            "normalization": table.normalization,
            "scores": {str(k): table.scores[k] for k in sorted(table.scores)},
        }
        try:
            mean, std = bws.split_half_reliability(
                g["annotations"], g["tuples"], repetitions=args.repetitions, seed=args.seed
            )
            shr_out[f"{cid}/{party}"] = {"mean": mean, "std": std}
            shr_means.append(mean)
        except InsufficientAnnotations:
            shr_out[f"{cid}/{party}"] = None

    scores_path = out_dir / "scores.json"
    with open(scores_path, "w", encoding="utf-8") as fh:
        json.dump(scores_out, fh, indent=2, sort_keys=True)
        fh.write("\n")
    shr_path = out_dir / "shr.json"
    overall = sum(shr_means) / len(shr_means) if shr_means else None
    with open(shr_path, "w", encoding="utf-8") as fh:
        json.dump({"groups": shr_out, "overall_mean": overall}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {scores_path} and {shr_path}")
    return 0


def cmd_summarize(args) -> int:
    config = _load_config(args.config)
    by_contract = _read_sentence_files(args.sentences)
    if args.contract not in by_contract:
        raise ClauserankError(f"contract {args.contract!r} not found in {args.sentences}")
    contract = _contract_from_records(args.contract, by_contract[args.contract], config)
    party = contract.party(args.party)

    if args.categories == "rule":
        predictions = categorize.predict_rule(contract, party, window=config.trigger_window)
    else:
        if not args.predictions:
            raise ClauserankError(f"--predictions required for --categories {args.categories}")
        source = categorize.SOURCE_GOLD if args.categories == "gold" else categorize.SOURCE_IMPORTED
        known = [p.canonical for p in config.parties]
        predictions = categorize.import_predictions(args.predictions, source=source, known_parties=known)

    options = {}
    if args.ranker == "random":
        if args.seed is None:
            raise ClauserankError("--seed required for the random ranker")
        options["seed"] = args.seed
    elif args.ranker == "oracle":
        if not args.scores:
            raise ClauserankError("--scores required for the oracle ranker")
        tables = _read_score_file(args.scores)
        try:
            options["gold_scores"] = tables[args.contract][args.party]
        except KeyError:
            raise ClauserankError(f"no scores for {args.contract}/{args.party} in {args.scores}") from None
    elif args.ranker == "model":
        if not args.pairwise:
            raise ClauserankError("--pairwise required for the model ranker")
        options["pairwise"] = _read_pairwise(args.pairwise)

    summary = pipeline.build_summary(
        contract, party, args.ranker, predictions, args.cr, cap=args.cap, **options
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{args.contract}__{args.party}__{args.ranker}__cr{args.cr:g}"
    json_path = out_dir / f"{stem}.json"
    text_path = out_dir / f"{stem}.txt"
    pipeline.write_summary(summary, json_path, text_path)
    print(f"wrote {json_path} and {text_path}")
    return 0


def _read_summaries(path) -> dict[tuple[str, str], pipeline.Summary]:
    p = Path(path)
    files = sorted(p.glob("*.json")) if p.is_dir() else [p]
    if not files:
        raise ClauserankError(f"no summary files under {path}")
    out = {}
    for f in files:
        s = pipeline.read_summary(f)
        out[(s.contract_id, s.party)] = s
    return out


def cmd_eval(args) -> int:
    preds = _read_summaries(args.pred)
    refs = _read_summaries(args.ref)
    rows = []
    for key in sorted(preds):
        if key not in refs:
            raise ClauserankError(f"no reference summary for contract/party {key}")
        rows.extend(pipeline.evaluate_summaries(preds[key], refs[key]))
    report = pipeline.aggregate_report(rows)
    pipeline.write_report_csv(report, args.out)
    print(f"wrote {args.out} ({len(report.rows)} rows)")
    for name in ("map", "ndcg"):
        print(f"average {name}: {report.averages[name]:.6f}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .annotsvc import AnnotationService, create_app

    if not Path(args.tuples).exists():
        raise ClauserankError(f"tuple file {args.tuples} does not exist")
    tuples = bws.read_tuples(args.tuples)
    texts: dict[str, dict[int, str]] = {}
    if args.sentences:
        for cid, recs in _read_sentence_files(args.sentences).items():
            texts[cid] = {r["index"]: r["text"] for r in recs}
    service = AnnotationService(
        tuples,
        args.log,
        sentence_texts=texts,
        annotations_per_tuple=args.annotations_per_tuple,
        lease_seconds=args.lease_seconds,
    )
    static = args.static if args.static else None
    app = create_app(service, static_dir=static)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# --- argument parsing ------------------------------------------------------


def _int_env(name, fallback):
    v = _env(name)
    return int(v) if v is not None else fallback


def _float_env(name, fallback):
    v = _env(name)
    return float(v) if v is not None else fallback


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clauserank",
        description="Party-specific contract summarization toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="segment and filter raw contract text files")
    p.add_argument("raw_dir")
    p.add_argument("--config", default=_env("config"))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("gen-tuples", help="build best-worst 4-tuple designs per contract and party")
    p.add_argument("--sentences", required=True, help="sentence JSONL file or directory")
    p.add_argument("--config", default=_env("config"))
    p.add_argument("--factor", type=float, default=_float_env("factor", 1.5))
    p.add_argument("--min-occ", type=int, default=_int_env("min_occ", 6))
    p.add_argument("--seed", type=int, default=_int_env("seed", None), required=_env("seed") is None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_tuples)

    p = sub.add_parser("aggregate", help="annotation log -> Bradley-Terry scores + SHR report")
    p.add_argument("--log", required=True)
    p.add_argument("--tuples", required=True)
    p.add_argument("--seed", type=int, default=_int_env("seed", None), required=_env("seed") is None)
    p.add_argument("--repetitions", type=int, default=_int_env("repetitions", 100))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("summarize", help="build a party-specific category-clustered summary")
    p.add_argument("--sentences", required=True)
    p.add_argument("--config", default=_env("config"))
    p.add_argument("--contract", required=True)
    p.add_argument("--party", required=True)
    p.add_argument("--ranker", choices=RANKER_NAMES, default=_env("ranker", "model"))
    p.add_argument("--categories", choices=("rule", "imported", "gold"), default=_env("categories", "rule"))
    p.add_argument("--predictions", default=_env("predictions"))
    p.add_argument("--scores", default=_env("scores"))
    p.add_argument("--pairwise", default=_env("pairwise"))
    p.add_argument("--cr", type=float, default=_float_env("cr", 0.10))
    p.add_argument("--cap", type=int, default=_int_env("cap", pipeline.DEFAULT_CAP))
    p.add_argument("--seed", type=int, default=_int_env("seed", None))
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("eval", help="score predicted summaries against references (CSV report)")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--tuples", required=True)
    p.add_argument("--sentences", default=_env("sentences"))
    p.add_argument("--log", required=True)
    p.add_argument("--host", default=_env("host", "127.0.0.1"))
    p.add_argument("--port", type=int, default=_int_env("port", 8321))
    p.add_argument("--annotations-per-tuple", type=int, default=_int_env("annotations_per_tuple", 2))
    p.add_argument("--lease-seconds", type=int, default=_int_env("lease_seconds", 1800))
    p.add_argument("--static", default=_env("static"))
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ClauserankError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
