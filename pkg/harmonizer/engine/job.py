from dataclasses import dataclass, field
from typing import Counter as CounterType, Dict, List, Literal, Optional, Tuple
from concurrent.futures import ThreadPoolExecutor
from collections import Counter
from tqdm import tqdm
from .agent import HarmonizationAgent
from .plan import HarmonizationPlan, HarmonizedPage, apply_plan, identity_plan, validate_plan
from .rule_agent import remap_page_categories
from .rules import RuleSet
from ..dataset.model import LayoutDataset, PageRecord
from ..taxonomy.taxonomy import TaxonomyMapping
from ..common import logger
from ..errors import AgentError, AgentExhaustedError, ConfigError, DataError, HarmonizationJobError, RemapError
import re

PolicyKind = Literal["fail_job", "identity_page", "retry_then_identity"]
PageStatus = Literal["harmonized", "fallback", "empty"]

@dataclass(frozen=True)
class FailurePolicy:
    kind: PolicyKind = "retry_then_identity"
    retries: int = 2

    @classmethod
    def parse(cls, value: str) -> "FailurePolicy":
        """Accepts `fail_job`, `identity_page` or `retry_<n>_then_identity`."""
        if value == "fail_job":
            return cls("fail_job", 0)
        if value == "identity_page":
            return cls("identity_page", 0)
        match = re.fullmatch(r"retry_(\d+)_then_identity", value or "")
        if match:
            return cls("retry_then_identity", int(match.group(1)))
        raise ConfigError(
            f"Unknown failure policy '{value}'. Use fail_job, identity_page or retry_<n>_then_identity"
        )

    @classmethod
    def default(cls) -> "FailurePolicy":
        return cls("retry_then_identity", 2)

    @property
    def attempts(self) -> int:
        return 1 + self.retries

    def __str__(self) -> str:
        if self.kind == "retry_then_identity":
            return f"retry_{self.retries}_then_identity"
        return self.kind

@dataclass
class PageOutcome:
    image_id: int
    status: PageStatus
    attempts: int
    source_count: int
    output_count: int
    rejection_reasons: List[str] = field(default_factory=list)
    rejection_kinds: List[str] = field(default_factory=list)
    provenance: Dict[str, List[int]] = field(default_factory=dict)
    group_sizes: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, object]:
        return {
            "image_id": self.image_id,
            "status": self.status,
            "attempts": self.attempts,
            "source_count": self.source_count,
            "output_count": self.output_count,
            "rejection_reasons": list(self.rejection_reasons),
            "provenance": self.provenance,
        }

@dataclass
class JobReport:
    agent: str
    policy: str
    pages: List[PageOutcome] = field(default_factory=list)

    @property
    def group_size_histogram(self) -> Dict[int, int]:
        sizes: CounterType = Counter()
        for page in self.pages:
            sizes.update(page.group_sizes)
        return dict(sorted(sizes.items()))

    @property
    def merged_groups(self) -> int:
        return sum(1 for page in self.pages for size in page.group_sizes if size > 1)

    @property
    def merged_annotations(self) -> int:
        return sum(size for page in self.pages for size in page.group_sizes if size > 1)

    @property
    def rejection_counts(self) -> Dict[str, int]:
        reasons: CounterType = Counter()
        for page in self.pages:
            reasons.update(page.rejection_kinds)
        return dict(sorted(reasons.items()))

    @property
    def status_counts(self) -> Dict[str, int]:
        return dict(sorted(Counter(page.status for page in self.pages).items()))

    def to_dict(self) -> Dict[str, object]:
        return {
            "agent": self.agent,
            "policy": self.policy,
            "summary": {
                "pages": len(self.pages),
                "status": self.status_counts,
                "source_annotations": sum(p.source_count for p in self.pages),
                "output_annotations": sum(p.output_count for p in self.pages),
                "merged_groups": self.merged_groups,
                "merged_annotations": self.merged_annotations,
                "group_size_histogram": {str(k): v for k, v in self.group_size_histogram.items()},
                "rejection_reasons": self.rejection_counts,
            },
            "pages": [page.to_dict() for page in self.pages],
        }

def _outcome(page: PageRecord, harmonized: HarmonizedPage, status: PageStatus,
             attempts: int, reasons: List[str], kinds: List[str]) -> PageOutcome:
    return PageOutcome(
        image_id=page.image_id, status=status, attempts=attempts,
        source_count=page.annotation_count, output_count=len(harmonized.annotations),
        rejection_reasons=reasons, rejection_kinds=kinds, provenance=harmonized.provenance_dict(),
        group_sizes=[len(harmonized.provenance[a.id]) for a in harmonized.annotations],
    )

def harmonize_page(page: PageRecord, agent: HarmonizationAgent, rules: RuleSet,
                   policy: FailurePolicy, mapping: TaxonomyMapping) -> Tuple[PageRecord, PageOutcome]:
    if not page.annotations:
        empty = HarmonizedPage(page.image_id, ())
        return page.with_annotations(()), _outcome(page, empty, "empty", 0, [], [])

    reasons: List[str] = []
    kinds: List[str] = []
    attempts = 0
    for _ in range(policy.attempts):
        attempts += 1
        try:
            plan: HarmonizationPlan = agent.propose(page, mapping, rules)
        except RemapError:
            raise
        except (AgentError, DataError) as err:
            reasons.append(f"{type(err).__name__}: {err}")
            kinds.append(type(err).__name__)
            logger.debug("Page %s attempt %d failed: %s", page.image_id, attempts, err)
            if isinstance(err, AgentExhaustedError):
                # the agent already spent its own retry budget on this page
                break
            continue
        violations = validate_plan(page, plan, rules)
        if not violations:
            harmonized = apply_plan(page, plan, rules)
            return page.with_annotations(harmonized.annotations), \
                _outcome(page, harmonized, "harmonized", attempts, reasons, kinds)
        reasons.extend(str(v) for v in violations)
        kinds.extend(v.kind for v in violations)
        logger.debug("Page %s attempt %d rejected: %s", page.image_id, attempts, reasons[-len(violations):])

    if policy.kind == "fail_job":
        raise HarmonizationJobError(page.image_id, reasons[-1] if reasons else "no plan")

    logger.warning("Page %s falls back to remap-only after %d attempt(s)", page.image_id, attempts)
    fallback = apply_plan(page, identity_plan(page, remap_page_categories(page, mapping)), rules)
    return page.with_annotations(fallback.annotations), _outcome(page, fallback, "fallback", attempts, reasons, kinds)

def harmonize_dataset(dataset: LayoutDataset, agent: HarmonizationAgent, rules: RuleSet,
                      policy: Optional[FailurePolicy] = None, *, mapping: TaxonomyMapping,
                      workers: int = 1, progress: bool = False) -> Tuple[LayoutDataset, JobReport]:
    """
    Runs agent -> validate_plan -> apply_plan over every page.

    Arguments
    ---------
    dataset: the source corpus
    agent: proposes one plan per page
    rules: the target standard; its taxonomy becomes the output taxonomy
    policy: what to do with pages whose plans fail (default retry_2_then_identity)
    mapping: source -> target category mapping, used by the agent and by fallbacks
    workers: page-level worker threads; output order does not depend on it
    """
    policy = policy or FailurePolicy.default()
    if workers < 1:
        raise ConfigError("workers must be >= 1")

    run_page = lambda page: harmonize_page(page, agent, rules, policy, mapping)
    results: List[Tuple[PageRecord, PageOutcome]] = []
    with tqdm(total=len(dataset.pages), disable=not progress, desc=f"Harmonizing {dataset.name}") as bar:
        if workers == 1:
            for page in dataset.pages:
                results.append(run_page(page))
                bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                futures = [executor.submit(run_page, page) for page in dataset.pages]
                try:
                    for future in futures:
                        results.append(future.result())
                        bar.update(1)
                except BaseException:
                    for future in futures:
                        future.cancel()
                    raise

    report = JobReport(agent=getattr(agent, "name", type(agent).__name__), policy=str(policy))
    report.pages = [outcome for _, outcome in results]
    output = dataset.with_pages((page for page, _ in results), taxonomy=rules.target_taxonomy)
    logger.info(
        "Harmonized %d page(s): %d -> %d annotations (%s)", len(report.pages),
        dataset.annotation_count, output.annotation_count, report.status_counts
    )
    return output, report
