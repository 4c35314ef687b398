from typing import Any, Mapping, Optional, Sequence
from contextlib import redirect_stderr
from cmd2 import Cmd2ArgumentParser
from termcolor import colored
import io
import sys
from .parsers import build_parser
from .commands import execute, write_error
from ..config import resolve_config
from ..common import logger, setup_logging
from ..errors import EXIT_OK, HarmonizerError, UsageError, exit_code_for

def report_error(subcommand: str, out: Optional[str], err: BaseException) -> int:
    logger.debug("%s failed", subcommand, exc_info=err)
    write_error(subcommand, out, err)
    print(colored(f"Error: [ {str(err).strip()} ]", "red"), file=sys.stderr)
    return exit_code_for(err)

def run_args(subcommand: str, flags: Mapping[str, Any]) -> int:
    """Resolves the configuration of one subcommand and runs it."""
    flags = {k: v for k, v in flags.items() if not k.startswith("cmd2_") and not k.startswith("__")}
    setup_logging(flags.get("log_level") or "INFO")
    try:
        config = resolve_config(subcommand, flags, flags.get("config"))
        setup_logging(config.log_level)
        execute(config)
    except (HarmonizerError, OSError) as err:
        return report_error(subcommand, flags.get("out"), err)
    return EXIT_OK

def _out_flag(argv: Sequence[str]) -> Optional[str]:
    """The --out value of a command line that failed to parse, if it can be recovered."""
    parser = Cmd2ArgumentParser(add_help=False)
    parser.add_argument("--out", "-o")
    try:
        known, _ = parser.parse_known_args(argv)
    except SystemExit:
        return None
    return known.out

def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point. With no arguments an interactive shell is opened instead.
    Returns the process exit code.
    """
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        from .shell import HarmonizerShell
        return HarmonizerShell().cmdloop() or EXIT_OK
    parser = build_parser()
    captured = io.StringIO()
    try:
        with redirect_stderr(captured):
            args = parser.parse_args(argv)
    except SystemExit as exit:
        sys.stderr.write(captured.getvalue())
        if exit.code in (0, None):
            return EXIT_OK
        usage = captured.getvalue().strip().splitlines()
        err = UsageError(usage[-1] if usage else f"Invalid arguments: {' '.join(argv)}")
        return report_error(argv[0], _out_flag(argv), err)
    flags = vars(args)
    return run_args(flags.pop("subcommand"), flags)

def main() -> None:
    sys.exit(run())
