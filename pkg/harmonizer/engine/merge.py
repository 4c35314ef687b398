from typing import Sequence
from dataclasses import replace
from ..dataset.model import LayoutDataset
from ..errors import DataError
from ..common import logger

def merge_datasets(datasets: Sequence[LayoutDataset], name: str = "merged") -> LayoutDataset:
    """
    Concatenates datasets that already share one taxonomy into a single training
    set. Image ids are renumbered 1..N in input order and each page remembers the
    dataset it came from under `source_dataset`; annotation ids are made unique
    by offsetting them per dataset.
    """
    if not datasets:
        raise DataError("Nothing to merge")
    taxonomy = datasets[0].taxonomy
    for dataset in datasets[1:]:
        if dataset.taxonomy.names != taxonomy.names:
            raise DataError(
                f"Cannot merge '{dataset.name}': its taxonomy differs from '{datasets[0].name}'. "
                "Remap or harmonize it into the same target first."
            )

    pages = []
    image_id, ann_offset = 0, 0
    for dataset in datasets:
        max_id = 0
        for page in dataset.pages:
            image_id += 1
            annotations = [replace(ann, id=ann.id + ann_offset) for ann in page.annotations]
            max_id = max([max_id] + [ann.id for ann in page.annotations])
            extras = dict(page.extras)
            extras.update({"source_dataset": dataset.name, "source_image_id": page.image_id})
            pages.append(replace(page, image_id=image_id, annotations=tuple(annotations), extras=extras))
        ann_offset += max_id
    logger.info("Merged %d dataset(s) into %d page(s)", len(datasets), len(pages))
    return LayoutDataset(name=name, taxonomy=taxonomy, pages=pages)
