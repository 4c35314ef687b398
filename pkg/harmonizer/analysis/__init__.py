from .discrepancy import DatasetOverview, ClassStats, CrossRatio, Comparison, DiscrepancyReport
from .discrepancy import dataset_overview, overview_from_counts, class_distribution, distribution_from_counts
from .discrepancy import spatial_stats, cross_ratios, build_report, annotation_frame
