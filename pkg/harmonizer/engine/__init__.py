from .rules import Convention, RuleSet, load_rules, save_rules, rules_from_dict, builtin_rules, resolve_rules
from .plan import GroupDirective, HarmonizationPlan, HarmonizedPage, Partition, PlanViolation
from .plan import validate_plan, apply_plan, identity_plan
from .rule_agent import rule_agent_propose
from .agent import HarmonizationAgent, RuleAgent
from .job import FailurePolicy, JobReport, PageOutcome, harmonize_dataset, harmonize_page
from .merge import merge_datasets

__all__ = [
    "Convention", "RuleSet", "load_rules", "save_rules", "rules_from_dict",
    "builtin_rules", "resolve_rules", "GroupDirective", "HarmonizationPlan",
    "HarmonizedPage", "Partition", "PlanViolation", "validate_plan", "apply_plan",
    "identity_plan", "rule_agent_propose", "HarmonizationAgent", "RuleAgent",
    "FailurePolicy", "JobReport", "PageOutcome", "harmonize_dataset",
    "harmonize_page", "merge_datasets",
]
