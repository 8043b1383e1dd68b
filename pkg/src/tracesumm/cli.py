"""Command-line entry point: ``tracesumm <subcommand> [options]``.

Every subcommand reads one log, validates all parameters before touching
the data, writes its outputs under ``--out`` with names derived from a
digest of the configuration, and prints a one-line summary.  Outputs are
written to temporary files and renamed only once the whole task succeeded.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import traceback
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .bench import benchmark_allpairs
from .clustering import distance_matrix, hierarchical_cluster, weighted_cluster_quality
from .edit_distance import distances_to
from .errors import ParameterError, TraceSummError
from .schemes import SCHEMES, build_mapping, validate_scheme
from .search import evaluate_pairs, threshold_search
from .summarization import summarize, summary_symbols
from .synthetic import generate_synthetic_log
from .topic_model import default_base_attribute
from .trace_model import TraceSet, dump_jsonl, load_jsonl, parse_csv_log, parse_xes_log, write_csv

FORMATS = ("csv", "xes", "jsonl")
TASKS = ("ingest", "summarize", "search", "cluster", "evaluate", "bench", "gen")


@dataclass
class RunConfig:
    task: str
    input: str | None = None
    format: str | None = None
    scheme: str | None = None
    schemes: tuple[str, ...] = ()
    attrs: tuple[str, ...] = ()
    k: tuple[int, ...] = ()
    lam: float = 0.5
    method: str = "nmf"
    reduced: bool = True
    chi: tuple[int, ...] = ()
    query: str | None = None
    verify: bool = False
    clusters: int | None = None
    linkage: str = "average"
    seed: int = 0
    threads: int | None = None
    out: str = "."
    gen: dict = field(default_factory=dict)

    def validate(self):
        """Check every parameter; raise before any data is read."""
        if self.task not in TASKS:
            raise ParameterError(f"unknown task {self.task!r}")
        if self.task != "gen":
            if not self.input:
                raise ParameterError("--input is required")
            if self.format not in FORMATS:
                raise ParameterError(f"cannot infer --format for {self.input!r}; pass one of {FORMATS}")
        if self.threads is not None and self.threads < 1:
            raise ParameterError(f"--threads={self.threads} must be at least 1")
        if any(c < 0 for c in self.chi):
            raise ParameterError("--chi values must be non-negative")
        if self.task == "bench":
            if not self.k:
                raise ParameterError("bench needs --k")
            for s in self.schemes:
                for k in self.k:
                    validate_scheme(s, k=k, attrs=self.attrs, lam=self.lam, method=self.method)
        elif self.scheme is not None:
            if len(self.k) > 1:
                raise ParameterError(f"{self.task} takes a single --k")
            validate_scheme(self.scheme, k=self.k[0] if self.k else None, attrs=self.attrs, lam=self.lam, method=self.method)
        if self.task in ("summarize", "search", "evaluate") and self.scheme is None:
            raise ParameterError(f"{self.task} needs --scheme")
        if self.task == "search":
            if not self.query:
                raise ParameterError("search needs --query")
            if len(self.chi) != 1:
                raise ParameterError("search needs exactly one --chi")
        if self.task == "evaluate" and not self.chi:
            raise ParameterError("evaluate needs --chi")
        if self.task == "cluster":
            if self.clusters is None or self.clusters < 1:
                raise ParameterError(f"--clusters={self.clusters} must be at least 1")
            if self.linkage not in ("average", "complete"):
                raise ParameterError(f"unknown linkage {self.linkage!r}")
        if self.task == "gen":
            g = self.gen
            if g["traces"] < 1:
                raise ParameterError("--traces must be at least 1")
            if g["activities"] < 2:
                raise ParameterError("--activities must be at least 2")
            if not 0.0 <= g["noise"] <= 1.0:
                raise ParameterError("--noise must lie in [0, 1]")
            if g["variants"] < 1:
                raise ParameterError("--variants must be at least 1")

    def digest(self, corpus_digest: str = "") -> str:
        """Stable identifier of the inputs that determine the outputs."""
        cfg = asdict(self)
        for volatile in ("input", "out", "threads"):
            cfg.pop(volatile)
        cfg["corpus"] = corpus_digest
        return hashlib.sha1(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:12]


class Outputs:
    """Files staged next to their final names and committed together."""

    def __init__(self, directory: Path, stem: str):
        self.directory = directory
        self.stem = stem
        self.staged: list[tuple[Path, Path]] = []

    def path(self, suffix: str) -> Path:
        final = self.directory / f"{self.stem}{suffix}"
        tmp = final.with_name(final.name + ".tmp")
        self.staged.append((tmp, final))
        return tmp

    def write_text(self, suffix: str, text: str) -> Path:
        tmp = self.path(suffix)
        tmp.write_text(text, encoding="utf-8")
        return self.staged[-1][1]

    def write_json(self, suffix: str, obj) -> Path:
        return self.write_text(suffix, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def write_csv(self, suffix: str, header, rows) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return self.write_text(suffix, buf.getvalue())

    def commit(self) -> list[Path]:
        for tmp, final in self.staged:
            os.replace(tmp, final)
        return [final for _, final in self.staged]

    def discard(self):
        for tmp, final in self.staged:
            for p in (tmp, final):
                p.unlink(missing_ok=True)


def _infer_format(path: str | None) -> str | None:
    if path is None:
        return None
    suffix = Path(path).suffix.lower().lstrip(".")
    return {"csv": "csv", "xes": "xes", "jsonl": "jsonl", "json": "jsonl"}.get(suffix)


def load_corpus(path: str, fmt: str) -> TraceSet:
    if fmt == "csv":
        return parse_csv_log(path, attributes=None)
    if fmt == "xes":
        return parse_xes_log(path)
    return load_jsonl(path)


def _mapping(cfg: RunConfig, corpus: TraceSet, scheme: str, k):
    return build_mapping(
        corpus, scheme, k=k, attrs=cfg.attrs, lam=cfg.lam, method=cfg.method, seed=cfg.seed
    )


def _fmt(x):
    return "" if x is None else f"{x:.6g}" if isinstance(x, float) else str(x)


# ----------------------------------------------------------------------------
# tasks
# ----------------------------------------------------------------------------


def _task_ingest(cfg, corpus, out: Outputs) -> str:
    dest = out.path(".jsonl")
    dump_jsonl(corpus, dest)
    n_events = sum(len(t) for t in corpus)
    return f"ingested {len(corpus)} traces, {n_events} events, attributes {','.join(corpus.schema.attributes)}"


def _task_summarize(cfg, corpus, out: Outputs) -> str:
    f = _mapping(cfg, corpus, cfg.scheme, cfg.k[0] if cfg.k else None)
    summaries = summarize(corpus, f, reduced=cfg.reduced)
    rows = [(t.id, len(t), len(s), " ".join(f.labels[c] for c in s.symbols)) for t, s in zip(corpus, summaries)]
    out.write_csv(".csv", ("trace_id", "original_length", "summary_length", "summary"), rows)
    out.write_json(".mapping.json", f.to_json())
    mean_len = float(np.mean([len(s) for s in summaries]))
    return f"summarized {len(corpus)} traces with {cfg.scheme} (k={f.k}), mean summary length {mean_len:.2f}"


def _task_search(cfg, corpus, out: Outputs) -> str:
    f = _mapping(cfg, corpus, cfg.scheme, cfg.k[0] if cfg.k else None)
    chi = cfg.chi[0]
    res = threshold_search(cfg.query, corpus, f, chi, reduced=cfg.reduced, verify=cfg.verify, threads=cfg.threads)
    # brute force over the whole corpus for the metric blob
    pos = corpus.position(cfg.query)
    originals = summary_symbols(corpus, None, domain=f.domain)
    summaries = summary_symbols(corpus, f, cfg.reduced)
    d_orig = distances_to(originals[pos], originals, threads=cfg.threads)
    d_summ = distances_to(summaries[pos], summaries, threads=cfg.threads)
    cand = set(res.candidate_ids)
    verified = set(res.verified_ids or ())
    rows = []
    for tid, ds, do in zip(corpus.ids, d_summ, d_orig):
        rows.append(
            (
                tid,
                int(ds),
                int(do) if cfg.verify else "",
                int(tid in cand),
                int(tid in verified) if cfg.verify else "",
            )
        )
    out.write_csv(
        ".csv", ("trace_id", "summary_distance", "original_distance", "candidate", "verified"), rows
    )
    truth = set(np.asarray(corpus.ids)[d_orig <= chi].tolist())
    fp = len(cand - truth) / len(cand) if cand else 0.0
    recall = len(cand & truth) / len(truth) if truth else 1.0
    violations = float(np.mean(d_summ > d_orig))
    out.write_json(
        ".json",
        {
            "chi": chi,
            "k": f.k,
            "scheme": cfg.scheme,
            "query": cfg.query,
            "fp_rate": fp,
            "recall": recall,
            "violation_fraction": violations,
            "prefilter_ms": res.prefilter_ms,
            "verify_ms": res.verify_ms,
        },
    )
    tail = f", {len(verified)} verified" if cfg.verify else ""
    return f"query {cfg.query}: {len(cand)} candidates within chi={chi}{tail}, fp_rate {fp:.3f}, recall {recall:.3f}"


def _task_cluster(cfg, corpus, out: Outputs) -> str:
    if cfg.clusters > len(corpus):
        raise ParameterError(f"--clusters={cfg.clusters} exceeds the {len(corpus)} traces")
    base = default_base_attribute(corpus.schema)
    f = None
    domain = (base,)
    if cfg.scheme is not None:
        f = _mapping(cfg, corpus, cfg.scheme, cfg.k[0] if cfg.k else None)
        domain = f.domain
    original = distance_matrix(corpus, domain=domain, threads=cfg.threads)
    matrix = original if f is None else distance_matrix(corpus, f, reduced=cfg.reduced, threads=cfg.threads)
    clustering = hierarchical_cluster(matrix, cfg.clusters, cfg.linkage)
    reference = None if f is None else hierarchical_cluster(original, cfg.clusters, cfg.linkage)
    quality = weighted_cluster_quality(clustering, original, reference)
    out.write_csv(".csv", ("trace_id", "cluster_id"), zip(clustering.ids, clustering.labels.tolist()))
    report = quality.to_json()
    report["space"] = matrix.space
    out.write_json(".json", report)
    sil = "n/a" if quality.silhouette is None else f"{quality.silhouette:.3f}"
    return f"clustered {len(corpus)} traces into {cfg.clusters} clusters in {matrix.space} space, silhouette {sil}"


def _task_evaluate(cfg, corpus, out: Outputs) -> str:
    f = _mapping(cfg, corpus, cfg.scheme, cfg.k[0] if cfg.k else None)
    metrics = evaluate_pairs(corpus, f, list(cfg.chi), reduced=cfg.reduced, threads=cfg.threads)
    header = ("chi", "k", "scheme", "fp_rate", "recall", "violation_count", "violation_fraction")
    rows = [
        (m.chi, f.k, cfg.scheme, _fmt(m.false_positive_rate), _fmt(m.recall), m.violation_count, _fmt(m.violation_fraction))
        for m in metrics
    ]
    out.write_csv(".csv", header, rows)
    out.write_json(".json", [dict(m.to_json(), k=f.k, scheme=cfg.scheme) for m in metrics])
    return f"evaluated {metrics[0].n_pairs} pairs at {len(metrics)} thresholds with {cfg.scheme} (k={f.k})"


def _task_bench(cfg, corpus, out: Outputs) -> str:
    schemes = [(s, k) for s in cfg.schemes for k in cfg.k]
    report = benchmark_allpairs(
        corpus, schemes, threads=cfg.threads, attrs=cfg.attrs, lam=cfg.lam, method=cfg.method, seed=cfg.seed
    )
    rows = [(r.scheme, _fmt(r.k), f"{r.mean_length:.4f}", f"{r.seconds:.6f}", r.pairs) for r in report.rows]
    out.write_csv(".csv", ("scheme", "k", "mean_length", "seconds", "pairs"), rows)
    out.write_json(".json", report.to_json())
    return f"timed {len(report.rows)} configurations over {report.rows[0].pairs} pairs with {report.threads} thread(s)"


def _task_gen(cfg, out: Outputs) -> str:
    g = cfg.gen
    log = generate_synthetic_log(
        g["traces"], g["activities"], n_variants=g["variants"], noise=g["noise"], seed=cfg.seed
    )
    fmt = cfg.format or "jsonl"
    if fmt == "csv":
        write_csv(log, out.path(".csv"))
    elif fmt == "jsonl":
        dump_jsonl(log, out.path(".jsonl"))
    else:
        raise ParameterError("gen writes csv or jsonl")
    return f"generated {len(log)} traces over {g['activities']} activities (seed {cfg.seed})"


TASK_FUNCS = {
    "ingest": _task_ingest,
    "summarize": _task_summarize,
    "search": _task_search,
    "cluster": _task_cluster,
    "evaluate": _task_evaluate,
    "bench": _task_bench,
}


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute one task; return the process exit status."""
    stdout = stdout or sys.stdout
    out_dir = Path(cfg.out)
    outputs = None
    try:
        cfg.validate()
        out_dir.mkdir(parents=True, exist_ok=True)
        if cfg.task == "gen":
            outputs = Outputs(out_dir, f"gen-{cfg.digest()}")
            line = _task_gen(cfg, outputs)
        else:
            corpus = load_corpus(cfg.input, cfg.format)
            outputs = Outputs(out_dir, f"{cfg.task}-{cfg.digest(corpus.digest)}")
            line = TASK_FUNCS[cfg.task](cfg, corpus, outputs)
        written = outputs.commit()
    except (TraceSummError, OSError, KeyError, ValueError) as exc:
        if outputs is not None:
            outputs.discard()
        print(f"error: {_origin(exc)}: {exc}", file=sys.stderr)
        return 1
    print(f"{line} -> {', '.join(str(p) for p in written)}", file=stdout)
    return 0


def _origin(exc: BaseException) -> str:
    """Module of the innermost package frame that raised ``exc``."""
    name = __name__
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("tracesumm"):
            name = mod
    return name


# ----------------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------------


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


def _threads_default():
    env = os.environ.get("TRACESUMM_THREADS")
    return int(env) if env and env.isdigit() else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracesumm", description="Summarize event-log traces and analyse them under edit distance.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="event log path")
    common.add_argument("--format", choices=FORMATS, help="input format (default: from the file extension)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=_threads_default(), help="worker threads (default: $TRACESUMM_THREADS)")
    common.add_argument("--out", default=".", help="output directory")

    scheme = argparse.ArgumentParser(add_help=False)
    scheme.add_argument("--scheme", choices=SCHEMES)
    scheme.add_argument("--attrs", type=_str_list, default=(), help="attribute subset, comma-separated")
    scheme.add_argument("--k", type=_int_list, default=(), help="summary alphabet size")
    scheme.add_argument("--lambda", dest="lam", type=float, default=0.5, help="topic mixing weight in [0, 1]")
    scheme.add_argument("--method", choices=("svd", "nmf"), default="nmf")
    scheme.add_argument("--reduced", action=argparse.BooleanOptionalAction, default=True)

    sub.add_parser("ingest", parents=[common], help="parse a log and store it as JSON lines")
    sub.add_parser("summarize", parents=[common, scheme], help="write the summary of every trace")
    p = sub.add_parser("search", parents=[common, scheme], help="threshold search for one query trace")
    p.add_argument("--query", required=True)
    p.add_argument("--chi", type=_int_list, required=True)
    p.add_argument("--verify", action="store_true")
    p = sub.add_parser("cluster", parents=[common, scheme], help="hierarchical clustering of all traces")
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--linkage", choices=("average", "complete"), default="average")
    p = sub.add_parser("evaluate", parents=[common, scheme], help="all-pairs search metrics at several thresholds")
    p.add_argument("--chi", type=_int_list, required=True, help="comma-separated thresholds")
    p = sub.add_parser("bench", parents=[common], help="time all-pairs distances per scheme and k")
    p.add_argument("--scheme", type=_str_list, default=("topic", "random"), help="comma-separated schemes")
    p.add_argument("--attrs", type=_str_list, default=())
    p.add_argument("--k", type=_int_list, required=True, help="comma-separated k values")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--method", choices=("svd", "nmf"), default="nmf")
    p.add_argument("--reduced", action=argparse.BooleanOptionalAction, default=True)
    p = sub.add_parser("gen", parents=[common], help="write a seeded synthetic log")
    p.add_argument("--traces", type=int, default=2000)
    p.add_argument("--activities", type=int, default=113)
    p.add_argument("--variants", type=int, default=4)
    p.add_argument("--noise", type=float, default=0.03)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    get = lambda name, default=None: getattr(ns, name, default)  # noqa: E731
    scheme = get("scheme")
    cfg = RunConfig(
        task=ns.task,
        input=ns.input,
        format=ns.format or _infer_format(ns.input),
        scheme=None if ns.task == "bench" else scheme,
        schemes=tuple(scheme) if ns.task == "bench" else (),
        attrs=tuple(get("attrs", ())),
        k=tuple(get("k", ())),
        lam=get("lam", 0.5),
        method=get("method", "nmf"),
        reduced=get("reduced", True),
        chi=tuple(get("chi", ()) or ()),
        query=get("query"),
        verify=get("verify", False),
        clusters=get("clusters"),
        linkage=get("linkage", "average"),
        seed=ns.seed,
        threads=ns.threads,
        out=ns.out,
    )
    if ns.task == "gen":
        cfg.gen = {"traces": ns.traces, "activities": ns.activities, "variants": ns.variants, "noise": ns.noise}
    return cfg


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
