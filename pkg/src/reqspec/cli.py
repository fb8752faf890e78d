"""Command-line tools: convert, kb-build, synth, seed-corpus, serve.

Exit codes: 0 clean, 1 operational failure (I/O, bad arguments),
2 semantic incompleteness (some lines needed clarification or errored).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import MalformedCorpus, ReqspecError
from .kb import kb_build, load_corpus, load_file, save_file
from .model import SlotKind
from .seed import ORDINAL_SCALES, seed_records
from .service import batch_outcomes, create_app, flush_periodically
from .synth import DEFAULT_MISSING_RATES, SynthesisControls, synthesize


def _stderr(message: str):
    if os.environ.get("NO_COLOR") or not sys.stderr.isatty():
        print(message, file=sys.stderr)
    else:
        print(f"\033[31m{message}\033[0m", file=sys.stderr)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


def cmd_convert(args) -> int:
    try:
        kb = load_file(args.kb)
        with open(args.input, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except (OSError, ReqspecError) as exc:
        _stderr(f"convert: {exc}")
        return 1

    outcomes = batch_outcomes(lines, kb)
    incomplete = 0
    try:
        with open(args.output, "w", encoding="utf-8") as out:
            for outcome, text in zip(
                outcomes, [ln.strip() for ln in lines if ln.strip()]
            ):
                if outcome["status"] == "ok":
                    record = {
                        "requirement": text,
                        "frame": outcome["frame"],
                        "formal": outcome["formal"],
                        "friendly": outcome["friendly"],
                    }
                elif outcome["status"] == "needs_clarification":
                    incomplete += 1
                    record = {
                        "requirement": text,
                        "needs_clarification": outcome["missing"],
                    }
                else:
                    incomplete += 1
                    record = {"requirement": text, "error": outcome["error"]}
                out.write(json.dumps(record) + "\n")
    except OSError as exc:
        _stderr(f"convert: {exc}")
        return 1

    if incomplete:
        _stderr(f"convert: {incomplete} line(s) need clarification or failed")
        return 2
    return 0


def cmd_kb_build(args) -> int:
    try:
        records = load_corpus(args.corpus)
        scales = None
        if args.scales:
            with open(args.scales, "r", encoding="utf-8") as fh:
                scales = json.load(fh)
        kb = kb_build(records, ordinal_scales=scales)
        save_file(kb, args.output)
    except MalformedCorpus as exc:
        _stderr(f"kb-build: {exc}")
        return 1
    except (OSError, ReqspecError, json.JSONDecodeError) as exc:
        _stderr(f"kb-build: {exc}")
        return 1
    print(f"wrote knowledge base v{kb.version}: {len(kb.vocabulary)} phrases,"
          f" {len(kb.patterns)} patterns")
    return 0


def cmd_seed_corpus(args) -> int:
    try:
        with open(args.output, "w", encoding="utf-8") as out:
            for rec in seed_records():
                out.write(json.dumps(rec) + "\n")
        if args.scales_output:
            with open(args.scales_output, "w", encoding="utf-8") as out:
                json.dump({k: list(v) for k, v in ORDINAL_SCALES.items()}, out, indent=2)
    except OSError as exc:
        _stderr(f"seed-corpus: {exc}")
        return 1
    return 0


def _parse_missing(values: list[str]) -> dict[SlotKind, float]:
    rates = dict(DEFAULT_MISSING_RATES)
    for item in values:
        if "=" not in item:
            raise ValueError(f"--missing expects kind=rate, got {item!r}")
        name, _, rate = item.partition("=")
        kind = SlotKind.from_name(name)
        if kind is None:
            raise ValueError(f"unknown slot kind {name!r}")
        rates[kind] = float(rate)
    return rates


def cmd_synth(args) -> int:
    try:
        kb = load_file(args.kb)
        controls = SynthesisControls(
            count=args.count,
            missing_rates=_parse_missing(args.missing or []),
            rng_seed=args.seed,
        )
        records = synthesize(kb, controls)
        with open(args.output, "w", encoding="utf-8") as out:
            for rec in records:
                out.write(json.dumps(rec) + "\n")
    except (OSError, ReqspecError, ValueError) as exc:
        _stderr(f"synth: {exc}")
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    try:
        kb = load_file(args.kb)
    except (OSError, ReqspecError) as exc:
        _stderr(f"serve: {exc}")
        return 1
    if not 0 < args.port < 65536:
        _stderr(f"serve: invalid port {args.port}")
        return 1

    app = create_app(
        kb,
        kb_path=args.kb,
        admin_token=args.admin_token,
        batch_limit=args.batch_limit,
        session_ttl=args.session_ttl,
        static_dir=args.static,
    )
    if args.flush_period > 0:
        flush_periodically(app, args.flush_period)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reqspec",
        description="Turn English monitoring requirements into formal specifications.",
    )
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="batch-convert a text file of requirements")
    p.add_argument("--input", required=True)
    p.add_argument("--kb", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("kb-build", help="build a knowledge base from annotated JSONL")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--scales", help="JSON file of named ordinal scales")
    p.set_defaults(func=cmd_kb_build)

    p = sub.add_parser("seed-corpus", help="write the built-in starter corpus")
    p.add_argument("--output", required=True)
    p.add_argument("--scales-output", help="also write the starter ordinal scales")
    p.set_defaults(func=cmd_seed_corpus)

    p = sub.add_parser("synth", help="synthesize an annotated corpus")
    p.add_argument("--kb", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument(
        "--missing",
        action="append",
        metavar="KIND=RATE",
        help="target missing fraction per slot kind (repeatable)",
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--kb", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--admin-token", default=None)
    p.add_argument("--batch-limit", type=int, default=1000)
    p.add_argument("--session-ttl", type=float, default=3600.0)
    p.add_argument("--flush-period", type=float, default=86400.0)
    p.add_argument("--static", help="directory of built UI files to host at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]

    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        config = {
            k.replace("-", "_"): v for k, v in _load_config(known.config).items()
        }
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        _stderr(f"config: {exc}")
        return 1

    parser = build_parser()
    if config:
        # Config supplies defaults; explicit flags still win.
        for action in parser._subparsers._group_actions:
            for sub_parser in action.choices.values():
                applicable = {}
                for a in sub_parser._actions:
                    if a.dest in config:
                        applicable[a.dest] = config[a.dest]
                        a.required = False
                sub_parser.set_defaults(**applicable)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
