from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Literal, Mapping, Optional, Tuple
from ..errors import ConfigError, RemapError

PolicyKind = Literal["error", "drop", "map_to"]

@dataclass(frozen=True)
class Taxonomy:
    """An ordered label space. Order defines the numeric category ids on save."""
    name: str
    names: Tuple[str, ...]

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if any(not isinstance(n, str) or not n for n in names):
            raise ConfigError(f"Taxonomy '{self.name}' has an empty category name")
        seen = set()
        duplicates = [n for n in names if n in seen or seen.add(n)]
        if duplicates:
            raise ConfigError(f"Taxonomy '{self.name}' repeats categories: {', '.join(duplicates)}")

    def __contains__(self, category: object) -> bool:
        return category in self.names

    def __iter__(self) -> Iterator[str]:
        return iter(self.names)

    def __len__(self) -> int:
        return len(self.names)

    def index(self, category: str) -> int:
        return self.names.index(category)

    def with_names(self, names: Iterable[str]) -> "Taxonomy":
        return Taxonomy(self.name, tuple(names))

@dataclass(frozen=True)
class UnmappedPolicy:
    kind: PolicyKind = "error"
    category: Optional[str] = None

    @classmethod
    def parse(cls, value) -> "UnmappedPolicy":
        """
        Accepts `error`, `drop`, `map_to:<category>` or `{"map_to": "<category>"}`.
        """
        if isinstance(value, UnmappedPolicy):
            return value
        if isinstance(value, Mapping) and set(value) == {"map_to"}:
            return cls("map_to", value["map_to"])
        if isinstance(value, str):
            if value in ("error", "drop"):
                return cls(value)
            if value.startswith("map_to:") and value[len("map_to:"):]:
                return cls("map_to", value[len("map_to:"):])
        raise ConfigError(f"Invalid unmapped_policy: {value!r}")

    def __str__(self) -> str:
        return f"map_to:{self.category}" if self.kind == "map_to" else self.kind

@dataclass(frozen=True)
class TaxonomyMapping:
    source: str
    target: Taxonomy
    entries: Mapping[str, str] = field(default_factory=dict)
    unmapped_policy: UnmappedPolicy = UnmappedPolicy()

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        bad = sorted({t for t in self.entries.values() if t not in self.target})
        if bad:
            raise ConfigError(
                f"Mapping '{self.source}' targets categories outside '{self.target.name}': {', '.join(bad)}"
            )
        policy = self.unmapped_policy
        if policy.kind == "map_to" and policy.category not in self.target:
            raise ConfigError(f"unmapped_policy target '{policy.category}' is not in '{self.target.name}'")

    @property
    def name(self) -> str:
        return f"{self.source}->{self.target.name}"

    def map_label(self, category: str) -> Optional[str]:
        """Returns the target category, or None when the policy drops it."""
        if category in self.entries:
            return self.entries[category]
        policy = self.unmapped_policy
        if policy.kind == "map_to":
            return policy.category
        if policy.kind == "drop":
            return None
        raise RemapError(category, self.name)

    def is_identity_on_image(self) -> bool:
        return all(self.entries.get(t, t) == t for t in self.entries.values())

    def to_dict(self) -> Dict[str, object]:
        return {
            "source": self.source,
            "target": self.target.name,
            "entries": dict(self.entries),
            "unmapped_policy": str(self.unmapped_policy),
        }

def identity_mapping(taxonomy: Taxonomy) -> TaxonomyMapping:
    return TaxonomyMapping(taxonomy.name, taxonomy, {name: name for name in taxonomy})

@dataclass(frozen=True)
class Correspondence:
    matched: List[Tuple[str, str]]
    unmatched_source: List[str]
    unmatched_target: List[str]

    def to_dict(self) -> Dict[str, object]:
        return {
            "matched": [list(pair) for pair in self.matched],
            "unmatched_source": list(self.unmatched_source),
            "unmatched_target": list(self.unmatched_target),
        }

def correspondence(mapping: TaxonomyMapping, source: Taxonomy, direct_only: bool = True) -> Correspondence:
    """
    Splits a mapping into direct one-to-one matches and the categories each side
    keeps for itself. With `direct_only`, a target reached from several source
    categories, or used as the catch-all `other`, does not count as a match.
    """
    targets: Dict[str, List[str]] = {}
    for category in source:
        target = mapping.entries.get(category)
        if target is not None:
            targets.setdefault(target, []).append(category)
    matched = []
    for category in source:
        target = mapping.entries.get(category)
        if target is None:
            continue
        if direct_only and (len(targets[target]) > 1 or target == "other"):
            continue
        matched.append((category, target))
    matched_src = {s for s, _ in matched}
    matched_tgt = {t for _, t in matched}
    return Correspondence(
        matched=matched,
        unmatched_source=[c for c in source if c not in matched_src],
        unmatched_target=[c for c in mapping.target if c not in matched_tgt],
    )
