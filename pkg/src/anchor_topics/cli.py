"""Command-line entry point: ``anchor-topics <command> ...``."""
import argparse
import json
import logging
import os
import sys

from . import corpus as corpus_mod
from .cooccurrence import build_q, row_normalize, to_similarity_graph
from .matrix_io import write_matrix
from .pipeline import (RunConfig, k_sweep, prepare, run_benchmark, run_explore, run_pipeline,
                       run_synthetic, summarize_timings)


def _int_list(text):
    return [int(t) for t in text.replace(",", " ").split()]


def _common(p):
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--corpus", help="docword.<name>.txt[.gz]")
    p.add_argument("--vocab", help="vocab.<name>.txt")
    p.add_argument("--preset", choices=sorted(corpus_mod.PRESETS))
    p.add_argument("--stopwords", help="stopword file (default: bundled MALLET list)")
    p.add_argument("--df-cutoff", type=int)
    p.add_argument("--high-freq", dest="high_freq_fraction", type=float)
    p.add_argument("--out")
    p.add_argument("--cache", help="cache directory for preprocessed corpora and Q")
    p.add_argument("--jobs", type=int, help="threads for building Q")


def _model_flags(p):
    p.add_argument("--method", choices=["sc", "faw"])
    p.add_argument("-k", type=int)
    p.add_argument("--seeds", type=_int_list, help="e.g. '0,1,2,3,4'")
    p.add_argument("--h-values", type=_int_list, help="e.g. '5,10,20'")
    p.add_argument("--proj-dim", type=int)
    p.add_argument("--max-iter", type=int, help="SoftClique local-search iteration cap")
    p.add_argument("--num-starts", type=int)
    p.add_argument("--eg-max-iter", type=int)
    p.add_argument("--eg-tol", type=float)
    p.add_argument("--parallel", action="store_true", default=None, help="run seeds concurrently")


_FIELDS = ("corpus", "vocab", "preset", "stopwords", "df_cutoff", "high_freq_fraction", "out", "cache",
           "jobs", "method", "k", "seeds", "h_values", "proj_dim", "max_iter", "num_starts",
           "eg_max_iter", "eg_tol", "parallel")


def _config(args) -> RunConfig:
    overrides = {f: getattr(args, f, None) for f in _FIELDS}
    if args.config:
        return RunConfig.from_file(args.config, **overrides)
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def _need_corpus(cfg, parser):
    if not (cfg.corpus and cfg.vocab):
        parser.error("--corpus and --vocab are required")


def build_parser():
    parser = argparse.ArgumentParser(prog="anchor-topics", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="anchors -> topics -> coherence for every seed")
    _common(p)
    _model_flags(p)
    p.add_argument("--synthetic", nargs=2, type=int, metavar=("V", "K"),
                   help="run on generated separable instances instead of a corpus")

    p = sub.add_parser("benchmark", help="time anchor selection for SC and FAW over a K sweep")
    _common(p)
    _model_flags(p)
    p.add_argument("--ks", type=_int_list, help="K values (default 10..100 step 10)")

    p = sub.add_parser("explore", help="distinct SoftClique anchor sets over many seeds")
    _common(p)
    _model_flags(p)
    p.add_argument("--rounds", type=int, default=100)

    p = sub.add_parser("preprocess", help="filter a corpus and write it in UCI format")
    _common(p)
    p.add_argument("--name", default="pre")

    p = sub.add_parser("build-q", help="write Q, the similarity graph and Q' as binary matrices")
    _common(p)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    cfg = _config(args)

    if args.command == "pipeline" and args.synthetic:
        v, k = args.synthetic
        report = run_synthetic(v, k, cfg.seeds, cfg)
        print(json.dumps({"all_exact": report["all_exact"],
                          "max_column_l1_error": max((r["max_column_l1_error"] or float("inf"))
                                                     for r in report["runs"])}))
        return 0 if report["all_exact"] else 1

    _need_corpus(cfg, parser)
    if args.command == "pipeline":
        manifest = run_pipeline(cfg)
        failed = [r["seed"] for r in manifest["runs"] if r["status"] != "ok"]
        print(json.dumps({"mean_coherence": manifest["mean_coherence"], "failed_seeds": failed}, indent=2))
        return 1 if failed else 0
    if args.command == "benchmark":
        rows = run_benchmark(cfg, ks=args.ks or k_sweep())
        summary = summarize_timings(rows)
        print("K\tsc_ms\tfaw_ms")
        for k, med in summary.items():
            print(f"{k}\t{med.get('sc', float('nan')):.1f}\t{med.get('faw', float('nan')):.1f}")
        return 0
    if args.command == "explore":
        report = run_explore(cfg, args.rounds)
        print(json.dumps({"rounds": report["rounds"], "distinct_sets": report["distinct_sets"]}))
        return 0
    if args.command == "preprocess":
        raw = corpus_mod.load_uci_files(cfg.corpus, cfg.vocab)
        pcfg = cfg.preprocess_config()
        pre = corpus_mod.preprocess(raw, pcfg)
        meta = corpus_mod.save_preprocessed(pre, raw, pcfg, cfg.out, args.name)
        print(json.dumps(meta["preprocessed"]))
        return 0
    if args.command == "build-q":
        prep = prepare(cfg)
        os.makedirs(cfg.out, exist_ok=True)
        prov = {"corpus_fingerprint": prep.fingerprint, "preprocess": cfg.preprocess_config().to_dict()}
        write_matrix(os.path.join(cfg.out, "q.bin"), prep.q.q, {**prov, "kind": "Q"})
        write_matrix(os.path.join(cfg.out, "graph.bin"), to_similarity_graph(prep.q).weights,
                     {**prov, "kind": "similarity_graph"})
        write_matrix(os.path.join(cfg.out, "qprime.bin"), row_normalize(prep.q).rows,
                     {**prov, "kind": "row_normalized_q"})
        with open(os.path.join(cfg.out, "vocab.txt"), "w") as fh:
            fh.writelines(w + "\n" for w in prep.corpus.vocab)
        print(json.dumps({"n_words": prep.q.n_words, "out": cfg.out}))
        return 0
    parser.error(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
