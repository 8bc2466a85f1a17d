"""Command-line entry point.

Exit codes:
    0  success
    1  usage or configuration error
    2  data, validation, checkpoint or I/O error
    3  numeric failure (non-finite loss or input)

Unexpected exceptions are logged and reported with exit code 1.
"""

import argparse
import sys
from typing import List, Optional

from . import __version__
from .commands import compare, evaluate, export_attention, synth, train
from .core.errors import (
    CheckpointError,
    ConfigError,
    DatasetError,
    DimensionError,
    LabelError,
    MissingGradientError,
    NumericError,
)
from .core.logger import get_logger

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

COMMANDS = (synth, train, evaluate, compare, export_attention)


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage errors as ConfigError instead of exiting with status 2."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog='intermodal-mtl',
        description='Multi-modal multi-task sentiment and emotion models with inter-modal attention'
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    subparsers = parser.add_subparsers(dest='command', help='Command to execute')
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def exit_code_for(error: BaseException) -> int:
    """Stable mapping from the error taxonomy to process exit codes."""
    if isinstance(error, (NumericError, MissingGradientError)):
        return EXIT_NUMERIC
    if isinstance(error, ConfigError):
        return EXIT_USAGE
    if isinstance(error, (DatasetError, DimensionError, LabelError, CheckpointError, OSError)):
        return EXIT_DATA
    return EXIT_USAGE


def main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` (``sys.argv[1:]`` by default), run the command, return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, 'command', None):
            parser.print_help(sys.stderr)
            return EXIT_USAGE
        return args.handler(args)
    except (ConfigError, DatasetError, DimensionError, LabelError, CheckpointError,
            OSError, NumericError, MissingGradientError) as e:
        code = exit_code_for(e)
        logger.error(f'{type(e).__name__}: {e}', details={'exit_code': code})
        print(f"error: {e}", file=sys.stderr)
        return code
    except Exception as e:
        logger.critical(f'Unexpected {type(e).__name__}: {e}', details={'exit_code': EXIT_USAGE})
        print(f"error: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
