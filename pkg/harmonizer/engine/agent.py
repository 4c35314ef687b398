from abc import ABC, abstractmethod
from .plan import HarmonizationPlan
from .rules import RuleSet
from .rule_agent import rule_agent_propose
from ..dataset.model import PageRecord
from ..taxonomy.taxonomy import TaxonomyMapping

class HarmonizationAgent(ABC):
    """
    Proposes a plan for one page. Implementations must not share mutable state
    between pages: `propose` may be called concurrently from worker threads.
    """
    name = "agent"

    @abstractmethod
    def propose(self, page: PageRecord, mapping: TaxonomyMapping, rules: RuleSet) -> HarmonizationPlan:
        ...

    def close(self) -> None:
        pass

class RuleAgent(HarmonizationAgent):
    name = "rule"

    def propose(self, page: PageRecord, mapping: TaxonomyMapping, rules: RuleSet) -> HarmonizationPlan:
        return rule_agent_propose(page, mapping, rules)
