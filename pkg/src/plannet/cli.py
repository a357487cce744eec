"""Command-line front end.

    plannet recognize --lib hang.lib --story rope.story --mode life
    plannet sweep --lib hang.lib --story rope.story --grid 1e-7:0.5:20:log --query "(hang k1)"
    plannet explain --lib hang.lib --story rope.story --mode story
    plannet oracle --lib hang.lib --story rope.story
    plannet lift --lib hang.lib --story rope.story
    plannet ratio --pe 1e-5 --pr 1e-5 --pk 1e-6

Data goes to standard output, diagnostics to standard error. Exit codes:
0 success, 1 parse error, 2 validation error, 3 inference error.
"""

import argparse
import csv
import logging
import sys
from typing import List, Optional

from . import analysis
from .config import Config, preset
from .errors import (
    ConfigError,
    GridSpecError,
    InferenceError,
    LibraryError,
    NetworkError,
    NetworkTooLargeError,
    SexprSyntaxError,
)
from .library import load_library, load_story
from .network import Equality, to_dot
from .session import build_network


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_VALIDATION = 2
EXIT_INFERENCE = 3


class InputFileError(Exception):
    """An input file could not be read."""


def fmt(p: float) -> str:
    return f"{p:.5e}"


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except (OSError, UnicodeDecodeError) as e:
        raise InputFileError(f"cannot read {path}: {e}") from None


def _located(path: str, error: Exception) -> str:
    return f"{path}:{error}"


def _load(args):
    lib_text = _read(args.lib)
    try:
        lib = load_library(lib_text)
    except (SexprSyntaxError, LibraryError) as e:
        raise type(e)(_located(args.lib, e)) from None
    if getattr(args, "story", None) is None:
        return lib, None
    story_text = _read(args.story)
    try:
        story = load_story(story_text, lib)
    except (SexprSyntaxError, LibraryError) as e:
        raise type(e)(_located(args.story, e)) from None
    return lib, story


def _config(args, force_mention: bool = False) -> Config:
    mode = preset(args.mode, args.equality_prior)
    overrides = dict(
        equality_prior=args.equality_prior,
        mention_base=args.mention_base,
        mention_lift=args.mention_lift,
        word_leak=args.word_leak,
        max_equality_candidates=args.max_candidates,
    )
    if force_mention:
        overrides["mention_enabled"] = True
    return mode.config.override(**overrides)


def _echo_config(out, mode: str, cfg: Config):
    out.write(f"# mode: {mode}\n")
    for name, value in cfg.model_dump().items():
        out.write(f"# {name}: {value}\n")


def cmd_recognize(args, out) -> int:
    lib, story = _load(args)
    cfg = _config(args)
    report = analysis.recognize(lib, story, cfg, mode=args.mode, include_all=args.all)
    _echo_config(out, report.mode, report.config)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["label", "posterior"])
    for row in report.rows:
        writer.writerow([row.label, fmt(row.posterior)])
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    grid = analysis.grid_from_spec(args.grid)
    lib, story = _load(args)
    cfg = _config(args)
    rows = analysis.sweep_equality_prior(lib, story, cfg, grid, args.query, workers=args.workers)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["equality_prior", "query", "posterior"])
    for row in rows:
        writer.writerow([fmt(row.equality_prior), row.query, fmt(row.posterior)])
    return EXIT_OK


def cmd_explain(args, out) -> int:
    lib, story = _load(args)
    out.write(to_dot(build_network(lib, story, _config(args))))
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    lib, story = _load(args)
    net = build_network(lib, story, _config(args))
    rows = analysis.oracle_table(net)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["label", "elimination", "enumeration", "abs_diff"])
    for row in rows:
        writer.writerow([row.label, fmt(row.elimination), fmt(row.enumeration), fmt(row.difference)])
    if not analysis.oracle_agrees(rows):
        worst = max(rows, key=lambda r: r.difference)
        logger.warning("oracle disagreement: %s differs by %g", worst.label, worst.difference)
        return EXIT_INFERENCE
    return EXIT_OK


def cmd_lift(args, out) -> int:
    lib, story = _load(args)
    cfg = _config(args, force_mention=True)
    net = build_network(lib, story, cfg)
    entities = sorted({node.kind.entity for node in net.of_kind(Equality)})
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["entity", "equality", "lift"])
    for entity in entities:
        for label, lift in sorted(analysis.mention_lifts(lib, story, cfg, entity).items()):
            writer.writerow([entity, label, fmt(lift)])
    return EXIT_OK


def cmd_ratio(args, out) -> int:
    closed = analysis.fragment_ratio(args.pe, args.pr, args.pk)
    exact = analysis.fragment_ratio_by_inference(args.pe, args.pr, args.pk)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["closed_form", "inference"])
    writer.writerow([fmt(closed), fmt(exact)])
    return EXIT_OK


def _add_inputs(parser, story=True):
    parser.add_argument("--lib", required=True, help="plan library file")
    if story:
        parser.add_argument("--story", required=True, help="story file")
    parser.add_argument("--mode", choices=["life", "story", "knob"], default="life")
    parser.add_argument("--equality-prior", type=float, help="the constant E (required for knob)")
    parser.add_argument("--mention-base", type=float, help="mention probability m0")
    parser.add_argument("--mention-lift", type=float, help="mention lift k")
    parser.add_argument("--word-leak", type=float, help="word leak probability")
    parser.add_argument("--max-candidates", type=int, help="equality candidates per slot term")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plannet", description="Bayesian plan recognition in stories and life")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("recognize", help="posteriors of plan and equality hypotheses")
    _add_inputs(p)
    p.add_argument("--all", action="store_true", help="also report type, slot and mention nodes")
    p.set_defaults(func=cmd_recognize)

    p = commands.add_parser("sweep", help="sweep the equality prior, CSV output")
    _add_inputs(p)
    p.add_argument("--grid", required=True, help="start:stop:steps:log|lin")
    p.add_argument("--query", required=True, help='plan label, e.g. "(hang k1)"')
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = commands.add_parser("explain", help="DOT rendering of the network")
    _add_inputs(p)
    p.set_defaults(func=cmd_explain)

    p = commands.add_parser("oracle", help="check elimination against enumeration")
    _add_inputs(p)
    p.set_defaults(func=cmd_oracle)

    p = commands.add_parser("lift", help="mention lift of each equality hypothesis")
    _add_inputs(p)
    p.set_defaults(func=cmd_lift)

    p = commands.add_parser("ratio", help="equality-fragment ratio P(k|r)/P(k)")
    p.add_argument("--pe", type=float, required=True)
    p.add_argument("--pr", type=float, required=True)
    p.add_argument("--pk", type=float, required=True)
    p.set_defaults(func=cmd_ratio)

    return parser


def _exit_code(error: Exception) -> int:
    if isinstance(error, (InputFileError, SexprSyntaxError, GridSpecError)):
        return EXIT_PARSE
    if isinstance(error, (LibraryError, ConfigError, NetworkError, NetworkTooLargeError)):
        return EXIT_VALIDATION
    return EXIT_INFERENCE


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_PARSE if e.code else EXIT_OK

    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        return args.func(args, sys.stdout)
    except (InputFileError, SexprSyntaxError, GridSpecError, LibraryError, ConfigError, NetworkError, InferenceError) as e:
        sys.stderr.write(f"plannet: error: {e}\n")
        return _exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
