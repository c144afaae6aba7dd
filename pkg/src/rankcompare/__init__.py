"""Cross-system comparison of university rankings."""

from .analyses import (build_top_list, discrepancy_lists, missing_report, overlap_matrix,
                       per_country_correlation, preference_ratios, preference_table, scatter_data,
                       skewness_report, top_overlap, unique_in_top)
from .entity_link import (LinkedCorpus, Thesaurus, build_thesaurus, link, link_datasets, load_rules,
                          normalize_name)
from .errors import RankCompareError
from .ingest import (IndicatorDef, InstitutionRecord, RankingDataset, SystemManifest, load_dataset,
                     parse_table)
from .pipeline import PipelineConfig, run_pipeline
from .report import AnalysisReport, emit_table
from .series import IndicatorSeries
from .stats import correlation_matrix, skewness, spearman
from .svg import emit_scatter_svg
from .transforms import (ClassThresholds, distance_to_median_classes, normalize_by_max,
                         percentile_rank, teaching_score)

__version__ = "0.1.0"
