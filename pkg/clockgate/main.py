"""
Command-line entry point: `python -m clockgate <design|simulate|budget|sweep> ...`
"""
import argparse
import sys
from typing import List, Optional

from clockgate.commands import register_all
from clockgate.core.config import settings
from clockgate.core.exceptions import ClockGateError
from clockgate.core.logging import logger, setup_logging


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Design and simulate the sigma_z geometric-phase gate on trapped-ion clock qubits",
    )
    parser.add_argument("--log-level", default=settings.LOG_LEVEL,
                        help="DEBUG, INFO, APP_INFO, WARNING or ERROR")
    parser.add_argument("--log-file", default=settings.LOG_FILE, help="Log file")
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    register_all(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(log_file=args.log_file, level=args.log_level)
    logger.app_info(f"Starting {settings.APP_NAME} {settings.APP_VERSION}: {args.command}")
    try:
        return args.handler(args)
    except ClockGateError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
