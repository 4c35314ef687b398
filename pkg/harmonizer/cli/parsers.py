from cmd2 import Cmd2ArgumentParser

PRECEDENCE = (
    "Option values are taken from, in decreasing precedence: command-line flags, "
    "the --config INI file, HARMONIZER_* environment variables, then the shipped defaults.ini."
)

def _common(parser: Cmd2ArgumentParser, out_help: str = "The output directory.") -> Cmd2ArgumentParser:
    # defaults stay None so unset flags fall through to the config layers
    parser.add_argument("--out", "-o", help=out_help)
    parser.add_argument("--config", "-c", help="An INI file with a [default] and per-subcommand sections.")
    parser.add_argument("--log-level", dest="log_level", type=str.upper,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR"), help="Logging level. Default INFO")
    parser.add_argument("--workers", "-w", type=int, help="Page-level worker threads. Default 1")
    parser.add_argument("--seed", type=int, help="Seed for any sampling. Default 0")
    return parser

def analyze_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser("analyze", epilog=PRECEDENCE,
                                description="Compares COCO datasets: overview, class distribution and spatial ratios.")
    parser.add_argument("--inputs", "-i", nargs="+", help="COCO files; the first one is the reference.")
    parser.add_argument("--map", "-m", help="Mapping applied to every non-reference dataset (builtin name or JSON).")
    parser.add_argument("--normalize-by-page", dest="normalize_by_page", action="store_const", const=True,
                        help="Divide box dimensions by the page size before averaging.")
    return _common(parser)

def harmonize_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser("harmonize", epilog=PRECEDENCE,
                                description="Harmonizes a COCO dataset into the target annotation standard.")
    parser.add_argument("--input", "-i", help="The source COCO file.")
    parser.add_argument("--images", help="Directory page images are resolved against. Default: the input's directory")
    parser.add_argument("--rules", help="Target RuleSet JSON, or 'builtin'.")
    parser.add_argument("--mapping", help="Source to target mapping: builtin name, 'identity', 'auto' or JSON path.")
    parser.add_argument("--agent", choices=("rule", "vlm"), help="Which agent proposes plans. Default rule")
    parser.add_argument("--policy", help="fail_job, identity_page or retry_<n>_then_identity.")
    vlm = parser.add_argument_group("vlm agent")
    vlm.add_argument("--endpoint", help="OpenAI-compatible chat-completions URL.")
    vlm.add_argument("--model", help="Model name sent with every request.")
    vlm.add_argument("--api-key-env", dest="api_key_env", help="Environment variable holding the API key.")
    vlm.add_argument("--timeout", type=float, help="Per-request timeout in seconds.")
    vlm.add_argument("--max-retries", dest="max_retries", type=int, help="Retries per page inside the agent.")
    vlm.add_argument("--concurrency", type=int, help="Maximum requests in flight.")
    return _common(parser)

def evaluate_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser("evaluate", epilog=PRECEDENCE,
                                description="Scores predicted structured documents against references.")
    parser.add_argument("--pred", "-p", help="Predicted documents (JSONL).")
    parser.add_argument("--ref", "-r", help="Reference documents (JSONL).")
    parser.add_argument("--iou-threshold", dest="iou_threshold", type=float, help="Detection IoU threshold. Default 0.5")
    parser.add_argument("--shift-window", dest="shift_window", type=int, help="Cell shift search window. Default 2")
    return _common(parser)

def repgeom_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser("repgeom", epilog=PRECEDENCE,
                                description="Silhouette, neighborhood purity and 2D projection of embeddings.")
    parser.add_argument("--embeddings", "-e", help="Embeddings JSONL.")
    parser.add_argument("--k", "-k", type=int, help="Neighbours for purity. Default 100")
    parser.add_argument("--remap", help="Label remap applied on load: heron, none, or a mapping JSON.")
    parser.add_argument("--sample-cap", dest="sample_cap", type=int, help="Per-class silhouette subsample size.")
    return _common(parser)

def scatter_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser("scatter", epilog=PRECEDENCE,
                                description="Renders a geometry report as an SVG scatter.")
    parser.add_argument("--geometry", "-g", help="A geometry_report.json.")
    return _common(parser, out_help="The SVG file to write.")

def remap_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser("remap", epilog=PRECEDENCE,
                                description="Relabels a COCO dataset through a mapping, nothing else.")
    parser.add_argument("--input", "-i", help="The source COCO file.")
    parser.add_argument("--mapping", help="Builtin name, 'identity', 'auto' or a mapping JSON.")
    return _common(parser)

def merge_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser("merge", epilog=PRECEDENCE,
                                description="Concatenates COCO datasets that share one taxonomy.")
    parser.add_argument("--inputs", "-i", nargs="+", help="COCO files in the target taxonomy.")
    parser.add_argument("--name", help="Name of the merged dataset. Default merged")
    return _common(parser)

SUBPARSERS = {
    "analyze": analyze_parser,
    "harmonize": harmonize_parser,
    "evaluate": evaluate_parser,
    "repgeom": repgeom_parser,
    "scatter": scatter_parser,
    "remap": remap_parser,
    "merge": merge_parser,
}

def build_parser() -> Cmd2ArgumentParser:
    parser = Cmd2ArgumentParser(
        "harmonizer", description="Document layout annotation harmonization toolkit.",
        epilog=PRECEDENCE + " Run without arguments for an interactive shell.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    subparsers.required = True
    for name, build in SUBPARSERS.items():
        sub = build()
        subparsers.add_parser(
            name, parents=[sub], add_help=False, help=sub.description,
            description=sub.description, epilog=sub.epilog,
        )
    return parser
