from cmd2 import Cmd, with_argparser
from cmd2.utils import categorize
from termcolor import colored
import argparse
from . import parsers
from .main import run_args
from .. import __version__

class HarmonizerShell(Cmd):
    """Interactive front end offering the same subcommands as the command line."""
    intro = f"harmonizer {__version__}. Type help or ? to list commands."
    prompt = "harmonizer> "

    def __init__(self, **kwargs):
        super().__init__(allow_cli_args=False, **kwargs)
        self.last_exit_code = 0

    def _run(self, subcommand: str, args: argparse.Namespace) -> None:
        self.last_exit_code = run_args(subcommand, vars(args))
        if self.last_exit_code:
            self.perror(colored(f"{subcommand} exited with code {self.last_exit_code}", "red"))
        else:
            self.pfeedback(colored(f"{subcommand} done", "green"))

    @with_argparser(parsers.analyze_parser())
    def do_analyze(self, args):
        self._run("analyze", args)

    @with_argparser(parsers.harmonize_parser())
    def do_harmonize(self, args):
        self._run("harmonize", args)

    @with_argparser(parsers.evaluate_parser())
    def do_evaluate(self, args):
        self._run("evaluate", args)

    @with_argparser(parsers.repgeom_parser())
    def do_repgeom(self, args):
        self._run("repgeom", args)

    @with_argparser(parsers.scatter_parser())
    def do_scatter(self, args):
        self._run("scatter", args)

    @with_argparser(parsers.remap_parser())
    def do_remap(self, args):
        self._run("remap", args)

    @with_argparser(parsers.merge_parser())
    def do_merge(self, args):
        self._run("merge", args)

    categorize((
        do_analyze, do_harmonize, do_evaluate, do_repgeom, do_scatter, do_remap, do_merge
    ), "Harmonizer")
