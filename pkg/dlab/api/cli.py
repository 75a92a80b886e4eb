# dlab/api/cli.py
# Command line front end: dirichlet-lab run <config.json> | list

from dotenv import load_dotenv

from typing import List, Optional
import argparse
import json
import logging
import sys

from dlab import __version__
from dlab.core.exceptions import ConfigReadError, DirichletLabException
from dlab.core.logging import setup_logging

logger = logging.getLogger("dlab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dirichlet-lab",
        description="Reproducible experiments on Hardy spaces of Dirichlet series"
    )
    parser.add_argument("--version", action="version", version=f"dirichlet-lab {__version__}")
    parser.add_argument("--log-level", default=None, help="Override DLAB_LOG_LEVEL")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Run one experiment from a JSON config")
    run.add_argument("config", help="Path to the experiment config (JSON)")

    commands.add_parser("list", help="List experiments and their required params")
    return parser


def _run(path: str) -> int:
    from dlab.services.experiment_service import ExperimentService, parse_config

    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ConfigReadError(f"Cannot read config {path}: {str(e)}")

    config = parse_config(text)
    report = ExperimentService().run_experiment(config)
    print(report.model_dump_json(indent=2))
    return 0


def _list() -> int:
    from dlab.services.experiment_service import ExperimentService

    for info in ExperimentService().list_experiments():
        required = ", ".join(info.required_params) or "-"
        print(f"{info.name:<12} required: {required:<24} {info.description}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit status"""
    load_dotenv()
    args = build_parser().parse_args(argv)

    try:
        setup_logging(level=args.log_level)
        if args.command == "run":
            return _run(args.config)
        return _list()
    except DirichletLabException as e:
        notes = "; ".join(getattr(e, "__notes__", []))
        detail = f"{str(e)} ({notes})" if notes else str(e)
        print(json.dumps({"error": type(e).__name__, "detail": detail}), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
