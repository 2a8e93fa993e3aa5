import argparse
import logging
import sys
from typing import List, Optional

from sparsebvar.config.run_config import load_run_config
from sparsebvar.config.settings import settings
from sparsebvar.errors import ConfigError, SparseBVARError
from sparsebvar.monitor.log import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsebvar",
        description="Sparsified Minnesota BVARs: simulation study, estimation, forecasting and evaluation",
    )
    parser.add_argument("command", choices=["study", "fit", "forecast", "evaluate"])
    parser.add_argument("--config", help="JSON run configuration")
    parser.add_argument("--seed", type=int, help="master seed (overrides sampling.seed)")
    parser.add_argument("--workers", type=int, help="parallel workers (0 = all cores)")
    parser.add_argument("--output", help="run output directory (overrides paths.output)")
    parser.add_argument("--force", action="store_true", help="replace a non-empty output directory")
    parser.add_argument("--log-level", default=None, help=f"logging level (default {settings.LOG_LEVEL})")
    return parser


def init_database():
    try:
        from sparsebvar.database.connection import init_db
        if init_db():
            logger.debug("Run registry initialized")
    except Exception as e:
        logger.warning(f"Run registry unavailable: {e}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)

    try:
        cfg = load_run_config(args.config, {"seed": args.seed, "workers": args.workers, "output": args.output})
    except ConfigError as exc:
        logger.error(str(exc))
        return EXIT_CONFIG

    init_database()
    from sparsebvar.commands import COMMANDS

    try:
        summary = COMMANDS[args.command](cfg, force=args.force)
    except ConfigError as exc:
        logger.error(str(exc))
        return EXIT_CONFIG
    except SparseBVARError as exc:
        logger.error(f"{args.command} failed in {exc.operation or 'unknown operation'}: {exc}")
        return EXIT_RUNTIME
    except Exception as exc:
        logger.exception(f"{args.command} failed: {exc}")
        return EXIT_RUNTIME

    logger.info(f"{args.command} finished: {summary}")
    print(f"{args.command} completed -> {cfg.paths.output}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
