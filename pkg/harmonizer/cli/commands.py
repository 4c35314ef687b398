from typing import Callable, Dict, List, Optional
from pathlib import Path
import json
import sys
import pandas as pd
from .. import __version__
from ..config import JobConfig
from ..common import logger, write_json, file_digest
from ..errors import ConfigError, DataError, exit_code_for
from ..dataset import LayoutDataset, load_coco, save_coco
from ..taxonomy import identity_mapping, resolve_mapping, remap_dataset, builtin_target_taxonomy
from ..taxonomy.builtin import BUILTIN_MAPPINGS, builtin_taxonomy
from ..taxonomy.taxonomy import Taxonomy, TaxonomyMapping
from ..engine import FailurePolicy, RuleAgent, harmonize_dataset, merge_datasets, resolve_rules
from ..vlm import AgentConfig, TranscriptSink, VLMAgent
from ..analysis import build_report
from ..metrics import load_docs, evaluate_pages, aggregate, per_page_frame
from ..repgeom import GeometryReport, analyze_geometry, load_embeddings, render_scatter

Outputs = List[Path]

def auto_mapping(taxonomy: Taxonomy, spec: str, target: Optional[Taxonomy] = None) -> TaxonomyMapping:
    """
    `auto` picks the identity when the dataset already uses the target
    categories, otherwise the builtin mapping whose source taxonomy has exactly
    the dataset's categories.
    """
    target = target or builtin_target_taxonomy()
    if spec != "auto":
        return resolve_mapping(spec)
    if set(taxonomy.names) <= set(target.names):
        return identity_mapping(target)
    for name in BUILTIN_MAPPINGS:
        if set(taxonomy.names) == set(builtin_taxonomy(name).names):
            logger.info("Using builtin '%s' mapping for %s", name, taxonomy.name)
            return resolve_mapping(name)
    raise ConfigError(
        f"No builtin mapping matches the categories of '{taxonomy.name}'; pass --mapping"
    )

def _csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path

def cmd_analyze(config: JobConfig) -> Outputs:
    out = Path(config.out)
    datasets = [load_coco(path) for path in config.inputs["inputs"]]
    mapping = resolve_mapping(config["map"]) if config["map"] else None
    report = build_report(datasets, mapping=mapping, normalize_by_page=config["normalize_by_page"])
    text = out / "discrepancy_report.txt"
    out.mkdir(parents=True, exist_ok=True)
    text.write_text(report.render_text(), encoding="utf-8")
    return [write_json(report.to_dict(), out / "discrepancy_report.json"), text]

def _agent(config: JobConfig, out: Path):
    if config["agent"] == "rule":
        return RuleAgent(), []
    images = config["images"] or str(Path(config.inputs["input"]).parent)
    agent_config = AgentConfig(
        endpoint=config["endpoint"], model=config["model"], api_key_env=config["api_key_env"],
        timeout=config["timeout"], max_retries=config["max_retries"], max_concurrency=config["concurrency"],
        temperature=config["temperature"], backoff_base=config["backoff_base"],
        backoff_factor=config["backoff_factor"], images_dir=images,
    )
    transcripts = out / "transcripts.jsonl"
    return VLMAgent(agent_config, TranscriptSink(transcripts)), [transcripts]

def cmd_harmonize(config: JobConfig) -> Outputs:
    out = Path(config.out)
    dataset = load_coco(config.inputs["input"])
    rules = resolve_rules(config["rules"])
    mapping = auto_mapping(dataset.taxonomy, config["mapping"], rules.target_taxonomy)
    if tuple(mapping.target.names) != tuple(rules.target_taxonomy.names):
        raise ConfigError(
            f"Mapping '{mapping.name}' targets '{mapping.target.name}', not the rules' taxonomy "
            f"'{rules.target_taxonomy.name}'"
        )
    policy = FailurePolicy.parse(config["policy"])
    agent, extra = _agent(config, out)
    try:
        harmonized, report = harmonize_dataset(
            dataset, agent, rules, policy, mapping=mapping,
            workers=config.workers, progress=sys.stderr.isatty(),
        )
    finally:
        agent.close()
    return [
        save_coco(harmonized, out / "harmonized.json"),
        write_json(report.to_dict(), out / "job_report.json"),
    ] + extra

def cmd_evaluate(config: JobConfig) -> Outputs:
    out = Path(config.out)
    pred, ref = load_docs(config.inputs["pred"]), load_docs(config.inputs["ref"])
    pages = evaluate_pages(
        pred, ref, iou_threshold=config["iou_threshold"], shift_window=config["shift_window"],
        workers=config.workers, progress=sys.stderr.isatty(),
    )
    report = aggregate(pages)
    return [
        write_json(report.to_dict(), out / "metrics.json"),
        _csv(per_page_frame(pages), out / "per_page.csv"),
    ]

def cmd_repgeom(config: JobConfig) -> Outputs:
    out = Path(config.out)
    remap = None if config["remap"] in ("none", "") else resolve_mapping(config["remap"])
    embeddings = load_embeddings(config.inputs["embeddings"], remap=remap)
    report = analyze_geometry(embeddings, k=config["k"], sample_cap=config["sample_cap"], seed=config.seed)
    scatter = pd.DataFrame(report.scatter_rows(), columns=["id", "label", "x", "y"])
    return [
        write_json(report.to_dict(), out / "geometry_report.json"),
        _csv(scatter, out / "scatter.csv"),
    ]

def cmd_scatter(config: JobConfig) -> Outputs:
    path = config.inputs["geometry"]
    try:
        with open(path, "r", encoding="utf-8") as data:
            report = GeometryReport.from_dict(json.load(data))
    except json.JSONDecodeError as err:
        raise DataError(f"Malformed JSON in {path}: {err}") from err
    return [render_scatter(report, config.out)]

def cmd_remap(config: JobConfig) -> Outputs:
    out = Path(config.out)
    dataset = load_coco(config.inputs["input"])
    mapping = auto_mapping(dataset.taxonomy, config["mapping"])
    remapped, report = remap_dataset(dataset, mapping)
    return [
        save_coco(remapped, out / "remapped.json"),
        write_json(report.to_dict(), out / "remap_report.json"),
    ]

def cmd_merge(config: JobConfig) -> Outputs:
    datasets: List[LayoutDataset] = [load_coco(path) for path in config.inputs["inputs"]]
    merged = merge_datasets(datasets, name=config["name"])
    return [save_coco(merged, Path(config.out) / "merged.json")]

COMMANDS: Dict[str, Callable[[JobConfig], Outputs]] = {
    "analyze": cmd_analyze,
    "harmonize": cmd_harmonize,
    "evaluate": cmd_evaluate,
    "repgeom": cmd_repgeom,
    "scatter": cmd_scatter,
    "remap": cmd_remap,
    "merge": cmd_merge,
}

def output_dir(subcommand: str, out: Optional[str]) -> Optional[Path]:
    if not out:
        return None
    return Path(out).parent if subcommand == "scatter" else Path(out)

def write_manifest(config: JobConfig, outputs: Outputs) -> Path:
    directory = output_dir(config.subcommand, config.out)
    manifest = {
        "tool": "harmonizer",
        "version": __version__,
        "subcommand": config.subcommand,
        "config_hash": config.config_hash(),
        "config": config.to_dict(),
        "inputs": {path: file_digest(path) for path in config.input_paths()},
        "outputs": sorted(Path(p).name for p in outputs),
    }
    return write_json(manifest, directory / "run_manifest.json")

def write_error(subcommand: str, out: Optional[str], err: BaseException) -> Optional[Path]:
    directory = output_dir(subcommand, out)
    if directory is None:
        return None
    record = {
        "subcommand": subcommand,
        "error": type(err).__name__,
        "message": str(err),
        "exit_code": exit_code_for(err),
    }
    try:
        return write_json(record, directory / "error.json")
    except OSError as io_err:
        logger.debug("Could not write error.json: %s", io_err)
        return None

def execute(config: JobConfig) -> Outputs:
    """Runs one resolved subcommand and records its manifest."""
    logger.info("Running %s (config %s)", config.subcommand, config.config_hash()[:12])
    outputs = COMMANDS[config.subcommand](config)
    manifest = write_manifest(config, outputs)
    for path in outputs + [manifest]:
        logger.info("Wrote %s", path)
    return outputs
