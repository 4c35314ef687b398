from .taxonomy import Taxonomy, TaxonomyMapping, UnmappedPolicy, Correspondence
from .taxonomy import identity_mapping, correspondence
from .builtin import builtin_target_taxonomy, builtin_heron_remap, builtin_taxonomy
from .builtin import builtin_unstructured_remap, builtin_doclaynet_remap
from .builtin import load_mapping, save_mapping, load_taxonomy, resolve_mapping, mapping_from_dict

__all__ = [
    "Taxonomy", "TaxonomyMapping", "UnmappedPolicy", "Correspondence",
    "identity_mapping", "correspondence", "builtin_target_taxonomy",
    "builtin_heron_remap", "builtin_taxonomy", "builtin_unstructured_remap",
    "builtin_doclaynet_remap", "load_mapping", "save_mapping", "load_taxonomy",
    "resolve_mapping", "mapping_from_dict", "remap_dataset", "RemapReport",
]

def __getattr__(name):
    # remap depends on the dataset model, which itself imports Taxonomy
    if name in ("remap_dataset", "RemapReport"):
        from . import remap
        return getattr(remap, name)
    raise AttributeError(name)
