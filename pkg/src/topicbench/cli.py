"""Command-line front end: ingest -> (embed) -> fit -> eval -> map.

Grammar: `topicbench <subcommand> --config <path> [--set key=value]...
[--out <dir>]`. All randomness funnels through the single config seed,
fanned out per stage by a fixed offset. Every run writes manifest.json
last; a missing manifest means a failed run.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, coherence, embeddings, lda, lsa, topics, vectorize
from . import cluster as cluster_mod
from . import corpus as corpus_mod
from . import reduce as reduce_mod
from .errors import ConfigError, TopicbenchError

ENV_EMBED_URL = "TOPICBENCH_EMBED_URL"

# fixed fan-out of the config seed to per-stage seeds
STAGE_SEED_OFFSETS = {"svd": 1, "lda": 2, "reduce": 3, "map": 4}

VALID_METHODS = ("bertopic", "lda", "lsa")

CONFIG_SCHEMA = {
    "input": None,
    "columns": dict(corpus_mod.DEFAULT_COLUMNS),
    "preprocessing": {"stopwords_file": None, "stem": True, "lemma_file": None},
    "method": None,
    "vectorize": {"min_df": 5, "max_df_ratio": 0.5},
    "lsa": {"num_topics": 5, "n_words": 10},
    "lda": {
        "num_topics": 8,
        "alpha": None,
        "eta": 0.01,
        "kappa": 0.7,
        "tau0": 10.0,
        "batch_size": 256,
        "epochs": 5,
        "n_words": 10,
    },
    "bertopic": {
        "n_words": 10,
        "reduce": {
            "n_neighbors": 15,
            "n_components": 5,
            "min_dist": 0.1,
            "n_epochs": 200,
            "negative_samples": 5,
            "method": "umap",
        },
        "cluster": {"min_cluster_size": 15, "min_samples": None},
    },
    "provider": {
        "kind": "file",
        "location": None,
        "model_name": "default",
        "batch_size": 64,
        "retries": 2,
    },
    "eval": {"top_n": 10, "window_size": 110, "epsilon": 1e-12},
    "seed": None,
    "out": None,
}


def _merge(schema: dict, given: dict, path: str = "") -> dict:
    merged = {}
    for key, default in schema.items():
        if key in given and isinstance(default, dict) and given[key] is not None:
            sub = given[key]
            if not isinstance(sub, dict):
                raise ConfigError(f"config key {path}{key} must be an object")
            merged[key] = _merge(default, sub, f"{path}{key}.")
        elif key in given:
            merged[key] = given[key]
        else:
            merged[key] = dict(default) if isinstance(default, dict) else default
    for key in given:
        if key not in schema:
            raise ConfigError(f"unknown config key: {path}{key}")
    return merged


def _apply_set(config: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise ConfigError(f"--set expects key=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = config
    parts = key.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            raise ConfigError(f"unknown config key: {key}")
        node = node[part]
    if parts[-1] not in node:
        raise ConfigError(f"unknown config key: {key}")
    node[parts[-1]] = value


def load_config(path: str, overrides: list[str], out_flag: str | None) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    config = _merge(CONFIG_SCHEMA, raw)
    for assignment in overrides:
        _apply_set(config, assignment)
    if out_flag:
        config["out"] = out_flag
    if config["seed"] is None:
        raise ConfigError("config must set a seed")
    if not isinstance(config["seed"], int):
        raise ConfigError(f"seed must be an integer, got {config['seed']!r}")
    if config["provider"]["location"] is None:
        config["provider"]["location"] = os.environ.get(ENV_EMBED_URL)
    return config


def config_fingerprint(config: dict) -> str:
    # canonical form: parsed structure re-serialized with sorted keys,
    # so whitespace and key order in the file never matter
    hashable = {k: v for k, v in config.items() if k != "out"}
    canon = json.dumps(hashable, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _ingest(config: dict):
    if not config["input"]:
        raise ConfigError("config must set input")
    options = corpus_mod.IngestOptions(columns=config["columns"])
    report = corpus_mod.load_csv(config["input"], options)
    prep = config["preprocessing"]
    stopwords = corpus_mod.load_stopwords(prep["stopwords_file"])
    lemma = corpus_mod.load_lemma_overrides(prep["lemma_file"]) if prep["lemma_file"] else None
    built = corpus_mod.build_corpus(report, stopwords, stem=bool(prep["stem"]),
                                    lemma_overrides=lemma)
    return report, built, stopwords, lemma


def _out_dir(config: dict) -> Path:
    out = config.get("out") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, ensure_ascii=False)
        fh.write("\n")


def _write_weight_matrix(path: Path, matrix: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for row in matrix:
            fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def _read_weight_matrix(path: Path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        k, v = (int(x) for x in fh.readline().split())
        out = np.empty((k, v), dtype=np.float64)
        for i in range(k):
            out[i] = np.array(fh.readline().split(), dtype=np.float64)
    return out


def _manifest(out: Path, config: dict, command: str, corpus_stats: dict,
              timings: dict, outputs: list[str]) -> None:
    payload = {
        "artifact_version": __version__,
        "command": command,
        "config_fingerprint": config_fingerprint(config),
        "corpus": corpus_stats,
        "timings_s": {k: round(v, 6) for k, v in timings.items()},
        "outputs": outputs,
    }
    _write_json(out / "manifest.json", payload)


class _Timer:
    def __init__(self):
        self.timings: dict[str, float] = {}
        self._t0 = time.perf_counter()

    def lap(self, stage: str) -> None:
        now = time.perf_counter()
        self.timings[stage] = self.timings.get(stage, 0.0) + (now - self._t0)
        self._t0 = now


def cmd_ingest(config: dict) -> int:
    timer = _Timer()
    out = _out_dir(config)
    report, built, _, _ = _ingest(config)
    timer.lap("ingest")
    corpus_path = out / "corpus.jsonl"
    with open(corpus_path, "w", encoding="utf-8") as fh:
        for doc in built.documents:
            json.dump({"id": doc.id, "raw_text": doc.raw_text, "tokens": list(doc.tokens)},
                      fh, ensure_ascii=False)
            fh.write("\n")
    timer.lap("write")
    stats = {
        "rows_total": report.total_rows,
        "rows_kept": report.kept_rows,
        "rows_dropped": report.dropped_rows,
    }
    _manifest(out, config, "ingest", stats, timer.timings, ["corpus.jsonl"])
    return 0


def cmd_embed(config: dict) -> int:
    timer = _Timer()
    out = _out_dir(config)
    report, built, _, _ = _ingest(config)
    timer.lap("ingest")
    spec = _provider_spec(config)
    matrix = embeddings.get_embeddings(built, spec)
    timer.lap("embed")
    embeddings.save_embeddings_file(matrix, out / "embeddings.tsv")
    timer.lap("write")
    stats = {"rows_total": report.total_rows, "rows_kept": report.kept_rows,
             "rows_dropped": report.dropped_rows, "dim": int(matrix.vectors.shape[1])}
    _manifest(out, config, "embed", stats, timer.timings, ["embeddings.tsv"])
    return 0


def _provider_spec(config: dict) -> embeddings.ProviderSpec:
    p = config["provider"]
    if not p["location"]:
        raise ConfigError(
            f"provider.location is not set (config, --set, or {ENV_EMBED_URL})"
        )
    return embeddings.ProviderSpec(
        kind=p["kind"],
        location=p["location"],
        model_name=p["model_name"],
        batch_size=p["batch_size"],
        retries=p["retries"],
    )


def cmd_fit(config: dict) -> int:
    method = config["method"]
    if method not in VALID_METHODS:
        raise ConfigError(
            f"unknown method {method!r} (valid: {', '.join(VALID_METHODS)})"
        )
    timer = _Timer()
    out = _out_dir(config)
    seed = config["seed"]
    report, built, stopwords, lemma = _ingest(config)
    timer.lap("ingest")

    outputs: list[str] = []
    if method == "bertopic":
        # raw-token branch: no stemming for cluster word statistics
        raw_corpus = corpus_mod.build_corpus(report, stopwords, stem=False,
                                             lemma_overrides=lemma)
        spec = _provider_spec(config)
        matrix = embeddings.get_embeddings(raw_corpus, spec)
        timer.lap("embed")
        rcfg_dict = dict(config["bertopic"]["reduce"])
        rcfg = reduce_mod.ReduceConfig(seed=seed + STAGE_SEED_OFFSETS["reduce"], **rcfg_dict)
        reduced = reduce_mod.fit(matrix.vectors, rcfg)
        timer.lap("reduce")
        ccfg = cluster_mod.ClusterConfig(**config["bertopic"]["cluster"])
        result = cluster_mod.cluster(reduced, ccfg)
        timer.lap("cluster")
        vocab = vectorize.build_vocabulary(raw_corpus, **config["vectorize"])
        counts = vectorize.count_matrix(raw_corpus, vocab)
        weights, class_ids = topics.ctfidf(counts, result.labels)
        model = topics.top_words(
            weights, vocab, config["bertopic"]["n_words"], result.labels,
            method="bertopic", config_fingerprint=config_fingerprint(config),
            class_ids=class_ids,
        )
        timer.lap("topics")
        _write_weight_matrix(out / "weights.txt", weights)
        outputs.append("weights.txt")
    elif method == "lsa":
        vocab = vectorize.build_vocabulary(built, **config["vectorize"])
        counts = vectorize.count_matrix(built, vocab)
        weighted = vectorize.tfidf(counts)
        timer.lap("vectorize")
        factors = lsa.truncated_svd(
            weighted, config["lsa"]["num_topics"], seed + STAGE_SEED_OFFSETS["svd"]
        )
        model = lsa.lsa_topics(factors, vocab, config["lsa"]["n_words"])
        timer.lap("fit")
        _write_weight_matrix(out / "weights.txt", np.abs(factors.Vt))
        outputs.append("weights.txt")
    else:  # lda
        vocab = vectorize.build_vocabulary(built, **config["vectorize"])
        counts = vectorize.count_matrix(built, vocab)
        timer.lap("vectorize")
        lda_settings = dict(config["lda"])
        n_words = lda_settings.pop("n_words")
        lcfg = lda.LdaConfig(seed=seed + STAGE_SEED_OFFSETS["lda"], **lda_settings)
        fitted = lda.fit_online(counts, lcfg)
        model = lda.lda_topics(fitted, vocab, n_words, counts=counts,
                               alpha=lcfg.effective_alpha)
        timer.lap("fit")
        lda.save_checkpoint(fitted, out / "checkpoint.txt")
        _write_weight_matrix(out / "weights.txt", fitted.beta)
        outputs.extend(["checkpoint.txt", "weights.txt"])

    topics.save_topics(model, out / "topics.json")
    topics.save_assignments(model, out / "assignments.json")
    outputs = ["topics.json", "assignments.json"] + outputs
    timer.lap("write")
    stats = {
        "rows_total": report.total_rows,
        "rows_kept": report.kept_rows,
        "rows_dropped": report.dropped_rows,
        "vocab_size": len(vocab),
    }
    _manifest(out, config, "fit", stats, timer.timings, outputs)
    return 0


def _load_model_dir(path: Path) -> tuple[str, topics.TopicModel]:
    topics_path = path if path.name.endswith(".json") else path / "topics.json"
    if not topics_path.exists():
        raise ConfigError(f"model file not found: {topics_path}")
    entries = topics.load_topics(topics_path)
    assignments_path = topics_path.parent / "assignments.json"
    method = "unknown"
    assignments = np.empty(0, dtype=np.int64)
    if assignments_path.exists():
        with open(assignments_path, encoding="utf-8") as fh:
            payload = json.load(fh)
        method = payload.get("method", "unknown")
        assignments = np.array(payload["assignments"], dtype=np.int64)
    model = topics.TopicModel(
        topics=tuple((tid, tuple((w, s) for w, s in words)) for tid, words, _ in entries),
        assignments=assignments,
        method=method,
    )
    return method, model


def cmd_eval(config: dict, model_paths: list[str]) -> int:
    if not model_paths:
        raise ConfigError("eval requires at least one --model")
    timer = _Timer()
    out = _out_dir(config)
    _, built, _, _ = _ingest(config)
    timer.lap("ingest")
    settings = config["eval"]
    reports = []
    for raw_path in model_paths:
        method, model = _load_model_dir(Path(raw_path))
        report = coherence.evaluate(
            model, built,
            top_n=settings["top_n"],
            window_size=settings["window_size"],
            epsilon=settings["epsilon"],
        )
        reports.append((method, raw_path, report))
    timer.lap("score")
    outputs = []
    if len(reports) == 1:
        coherence.save_report(reports[0][2], out / "report.json")
        outputs.append("report.json")
    else:
        for method, raw_path, report in reports:
            name = f"report_{Path(raw_path).stem or method}.json"
            coherence.save_report(report, out / name)
            outputs.append(name)
        comparison = [
            {"model": method, "c_v": report.aggregate_c_v, "u_mass": report.aggregate_u_mass}
            for method, _, report in reports
        ]
        _write_json(out / "comparison.json", comparison)
        outputs.append("comparison.json")
    timer.lap("write")
    stats = {"n_documents": len(built)}
    _manifest(out, config, "eval", stats, timer.timings, outputs)
    return 0


def cmd_map(config: dict, model_paths: list[str]) -> int:
    if len(model_paths) != 1:
        raise ConfigError("map requires exactly one --model")
    timer = _Timer()
    out = _out_dir(config)
    model_dir = Path(model_paths[0])
    weights_path = model_dir / "weights.txt"
    if not weights_path.exists():
        raise ConfigError(f"model file not found: {weights_path}")
    weights = _read_weight_matrix(weights_path)
    _, model = _load_model_dir(model_dir)
    sizes = {}
    for a in model.assignments:
        a = int(a)
        if a >= 0:
            sizes[a] = sizes.get(a, 0) + 1
    class_ids = model.topic_ids()
    words = [model.topic_words(tid) for tid in class_ids]
    mapped = topics.intertopic_map(
        weights,
        sizes,
        config["seed"] + STAGE_SEED_OFFSETS["map"],
        top_words_per_topic=words,
        class_ids=class_ids,
    )
    timer.lap("map")
    topics.save_map(mapped, out / "map.json")
    timer.lap("write")
    _manifest(out, config, "map", {}, timer.timings, ["map.json"])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicbench",
        description="Fit and compare LSA, LDA, and embedding-cluster topic models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_model in (
        ("ingest", False), ("embed", False), ("fit", False),
        ("eval", True), ("map", True),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="UTF-8 JSON run configuration")
        p.add_argument("--set", action="append", default=[], dest="overrides",
                       metavar="KEY=VALUE", help="override a config key (dotted path)")
        p.add_argument("--out", default=None, help="output directory")
        if needs_model:
            p.add_argument("--model", action="append", default=[], dest="models",
                           help="fitted model directory (or topics.json)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.overrides, args.out)
        if args.command == "ingest":
            return cmd_ingest(config)
        if args.command == "embed":
            return cmd_embed(config)
        if args.command == "fit":
            return cmd_fit(config)
        if args.command == "eval":
            return cmd_eval(config, args.models)
        if args.command == "map":
            return cmd_map(config, args.models)
        raise ConfigError(f"unknown command {args.command!r}")
    except TopicbenchError as exc:
        print(json.dumps({"error": str(exc), "stage": args.command}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
