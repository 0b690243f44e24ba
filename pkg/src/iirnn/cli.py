import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any, NoReturn

import numpy as np
from pydantic import BaseModel
from rich.console import Console

from iirnn.baselines import (
    BprMf,
    ItemKnn,
    MostPopular,
    MostRecent,
    PopularityTable,
    SessionRecommender,
)
from iirnn.config import PRESETS, SynthSpec, TrainConfig, load_config, load_synth_spec
from iirnn.data.ingest import read_interaction_frame
from iirnn.data.synth import write_synthetic
from iirnn.errors import IIRNNError, TrainingError, UsageError
from iirnn.evaluation import average_reports, evaluate, relative_improvement
from iirnn.models.corpus import Corpus
from iirnn.models.report import EvalReport
from iirnn.nets import RnnRecommender
from iirnn.output.charts import generate_coldstart_chart
from iirnn.output.renderer import ReportRenderer
from iirnn.output.report_csv import emit_coldstart, emit_report, read_report
from iirnn.processing import preprocess
from iirnn.processing.corpus_io import read_corpus, vocabulary_hash, write_corpus
from iirnn.processing.split import hold_one_out_split
from iirnn.processing.stats import corpus_stats
from iirnn.training.checkpoint import load_checkpoint, save_checkpoint
from iirnn.training.trainer import train

logger = logging.getLogger(__name__)
console = Console()
err_console = Console(stderr=True)

BASELINES = ("popular", "recent", "knn", "bpr")
GLOBAL_KEYS = ("seed", "threads")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        raise UsageError(f"{self.prog}: {message}")


def _add_model_flags(
    parser: argparse.ArgumentParser, model: type[BaseModel], skip: Sequence[str] = ()
) -> None:
    """One ``--<key>`` flag per config key; values stay strings for pydantic."""
    group = parser.add_argument_group("configuration keys")
    for name, info in model.model_fields.items():
        if name in skip:
            continue
        flags = [f"--{name}"]
        if "_" in name:
            flags.append(f"--{name.replace('_', '-')}")
        default = info.get_default(call_default_factory=True)
        group.add_argument(
            *flags,
            dest=name,
            default=None,
            metavar=name.upper(),
            help=f"(default: {default})",
        )


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="key = value file")
    common.add_argument("--preset", choices=sorted(PRESETS), default=None)
    common.add_argument("--seed", default=None, help="random seed")
    common.add_argument("--threads", default=None, help="worker threads")
    common.add_argument("--quiet", action="store_true", help="Only log warnings")
    common.add_argument(
        "-v", "--verbose", action="store_true", help="Enable debug logging"
    )

    p = _Parser(
        prog="iirnn",
        description="Session-based recommendation with inter-intra RNNs",
    )
    sub = p.add_subparsers(dest="command")

    # --- preprocess ---
    pre = sub.add_parser(
        "preprocess", parents=[common], help="Turn an interaction log into a corpus"
    )
    _add_model_flags(pre, TrainConfig, GLOBAL_KEYS)

    # --- synth ---
    synth = sub.add_parser(
        "synth", parents=[common], help="Write a synthetic interaction log"
    )
    _add_model_flags(synth, SynthSpec, GLOBAL_KEYS)

    # --- train ---
    tr = sub.add_parser("train", parents=[common], help="Train an RNN recommender")
    _add_model_flags(tr, TrainConfig, GLOBAL_KEYS)

    # --- eval ---
    ev = sub.add_parser(
        "eval",
        parents=[common],
        help="Evaluate checkpoints (comma-separated checkpoints are averaged)",
    )
    _add_model_flags(ev, TrainConfig, GLOBAL_KEYS)

    # --- baseline ---
    bl = sub.add_parser("baseline", parents=[common], help="Evaluate baselines")
    bl.add_argument("--model", choices=[*BASELINES, "all"], default="all")
    bl.add_argument(
        "--split",
        choices=["temporal", "holdout"],
        default=None,
        help=(
            "holdout tests only each user's last session "
            "(default: holdout for bpr, temporal for the others)"
        ),
    )
    _add_model_flags(bl, TrainConfig, GLOBAL_KEYS)

    # --- coldstart ---
    cs = sub.add_parser(
        "coldstart", parents=[common], help="Cold-start curve from a report CSV"
    )
    cs.add_argument("--report", type=Path, required=True)
    cs.add_argument("--out", type=Path, default=Path("coldstart.csv"))
    cs.add_argument("--chart", type=Path, default=None, help="PNG line chart")
    cs.add_argument("--k", type=int, default=5)
    cs.add_argument(
        "--reference",
        default=None,
        help="Print changes relative to this model",
    )

    # --- stats ---
    st = sub.add_parser("stats", parents=[common], help="Corpus statistics")
    _add_model_flags(st, TrainConfig, GLOBAL_KEYS)

    return p


def _overrides(args: argparse.Namespace, model: type[BaseModel]) -> dict[str, Any]:
    return {name: getattr(args, name, None) for name in model.model_fields}


def _config(args: argparse.Namespace) -> TrainConfig:
    return load_config(args.config, _overrides(args, TrainConfig), args.preset)


def _require(value: str | None, flag: str) -> Path:
    if not value:
        raise UsageError(f"--{flag} is required")
    return Path(value)


def _load_corpus(cfg: TrainConfig) -> Corpus:
    if cfg.corpus:
        return read_corpus(cfg.corpus)
    if cfg.input:
        frame = read_interaction_frame(cfg.input, cfg.format)
        corpus, _ = preprocess(
            frame, cfg.gap, cfg.L, cfg.train_fraction, threads=cfg.threads
        )
        return corpus
    raise UsageError("--corpus (or --input) is required")


def _emit(report: EvalReport, out: Path, quiet: bool) -> None:
    emit_report(report, out)
    emit_coldstart(report, out.with_name("coldstart.csv"))
    if not quiet:
        ReportRenderer(console).render_report(report)


def _run_preprocess(args: argparse.Namespace) -> None:
    cfg = _config(args)
    source = _require(cfg.input, "input")
    out = _require(cfg.out, "out")
    frame = read_interaction_frame(source, cfg.format)
    corpus, _ = preprocess(
        frame, cfg.gap, cfg.L, cfg.train_fraction, threads=cfg.threads
    )
    write_corpus(corpus, out)
    if not args.quiet:
        ReportRenderer(console).render_stats(corpus_stats(corpus))


def _run_synth(args: argparse.Namespace) -> None:
    spec = load_synth_spec(args.config, _overrides(args, SynthSpec))
    out = _require(spec.out, "out")
    threads = int(args.threads) if args.threads else None
    write_synthetic(spec, out, threads)


def _run_train(args: argparse.Namespace) -> None:
    cfg = _config(args)
    path = _require(cfg.checkpoint, "checkpoint")
    corpus = _load_corpus(cfg)
    try:
        result = train(cfg, corpus)
    except TrainingError as exc:
        if exc.checkpoint is not None:
            fallback = path.with_name(path.name + ".last-good")
            save_checkpoint(exc.checkpoint, fallback)
            logger.warning("Saved last good checkpoint to %s", fallback)
        raise
    save_checkpoint(result.checkpoint, path)
    if not args.quiet:
        ReportRenderer(console).render_epochs(result.log, result.best_epoch)


def _run_eval(args: argparse.Namespace) -> None:
    cfg = _config(args)
    paths = [p.strip() for p in (cfg.checkpoint or "").split(",") if p.strip()]
    if not paths:
        raise UsageError("--checkpoint is required")
    corpus = _load_corpus(cfg)
    expected = vocabulary_hash(corpus.vocab)
    reports = []
    for path in paths:
        ckpt = load_checkpoint(path, expected)
        model = RnnRecommender(ckpt.params, ckpt.config.g)
        reports.append(
            evaluate(
                [model], corpus, cfg.ks, cfg.positions, cfg.average, cfg.threads
            )
        )
    report = reports[0] if len(reports) == 1 else average_reports(reports)
    _emit(report, Path(cfg.out or "report.csv"), args.quiet)


def _baselines(
    names: Sequence[str], corpus: Corpus, seed: int
) -> list[SessionRecommender]:
    models: list[SessionRecommender] = []
    for name in names:
        if name == "popular":
            models.append(MostPopular(PopularityTable.from_corpus(corpus)))
        elif name == "recent":
            models.append(MostRecent(corpus.num_items, seed))
        elif name == "knn":
            models.append(ItemKnn.fit(corpus))
        elif name == "bpr":
            models.append(BprMf.fit(corpus, np.random.default_rng(seed)))
    return models


def _run_baseline(args: argparse.Namespace) -> None:
    cfg = _config(args)
    temporal = _load_corpus(cfg)
    corpora = {"temporal": temporal}
    names = BASELINES if args.model == "all" else (args.model,)
    report = EvalReport()
    for name in names:
        split = args.split or ("holdout" if name == "bpr" else "temporal")
        if split not in corpora:
            corpora[split] = hold_one_out_split(temporal)
        corpus = corpora[split]
        logger.info("Evaluating %s on the %s split", name, split)
        models = _baselines([name], corpus, cfg.seed)
        report = report.merged(
            evaluate(models, corpus, cfg.ks, cfg.positions, cfg.average, cfg.threads)
        )
    _emit(report, Path(cfg.out or "baselines.csv"), args.quiet)


def _run_coldstart(args: argparse.Namespace) -> None:
    report = read_report(args.report)
    emit_coldstart(report, args.out, args.k)
    if args.chart is not None:
        generate_coldstart_chart(report, args.chart, args.k)
    if args.reference and not args.quiet:
        ReportRenderer(console).render_relative(
            relative_improvement(report, args.reference)
        )


def _run_stats(args: argparse.Namespace) -> None:
    cfg = _config(args)
    ReportRenderer(console).render_stats(corpus_stats(_load_corpus(cfg)))


COMMANDS = {
    "preprocess": _run_preprocess,
    "synth": _run_synth,
    "train": _run_train,
    "eval": _run_eval,
    "baseline": _run_baseline,
    "coldstart": _run_coldstart,
    "stats": _run_stats,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        err_console.print(f"[red]Error: {exc}[/red]")
        return exc.exit_code

    if args.command is None:
        parser.print_help()
        return 1

    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s: %(message)s")
    logging.getLogger().setLevel(level)

    try:
        COMMANDS[args.command](args)
    except KeyboardInterrupt:
        err_console.print("\n[yellow]Cancelled.[/yellow]")
        return 1
    except IIRNNError as exc:
        err_console.print(f"[red]Error: {exc}[/red]")
        if args.verbose:
            logger.debug("Traceback", exc_info=True)
        return exc.exit_code
    except OSError as exc:
        err_console.print(f"[red]Error: {exc}[/red]")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
