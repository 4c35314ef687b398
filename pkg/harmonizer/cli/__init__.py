from .main import run, run_args, main
from .parsers import build_parser
from .commands import execute, auto_mapping, COMMANDS
