"""Saliency-driven scanpath generation, evaluation, and parameter sweeps."""

__version__ = "0.1.0"

from .types import (
    DecayKind,
    ElementBox,
    ElementCategory,
    Fixation,
    GuiType,
    ParseError,
    RolloutConfig,
    SaliencyMap,
    Scanpath,
    ValidationError,
    validate_scanpath,
)
from .saliency import (
    GuiImage,
    IttiKochSaliency,
    itti_koch_saliency,
    load_density_map,
    load_image,
    resize,
    save_density_map,
)
from .generate import ScanpathPredictor, apply_ior_mask, decay_weight, rollout
from .metrics import (
    MetricReport,
    RecurrenceConfig,
    compare,
    cross_recurrence_matrix,
    determinism,
    dtw,
    eyenalysis,
    laminarity,
)
from .analysis import (
    PairedTestResult,
    VisitStats,
    aggregate,
    map_fixations_to_elements,
    paired_t_test,
    visit_revisit,
)
from .dataset import (
    DatasetManifest,
    generate_fixture_dataset,
    load_element_boxes,
    load_manifest,
    read_scanpath_csv,
    write_scanpath_csv,
)
from .sweep import (
    FileDensityBackend,
    IttiKochBackend,
    SweepGrid,
    SweepResult,
    emit,
    evaluate_config,
    run_sweep,
)

__all__ = [
    "DecayKind",
    "ElementBox",
    "ElementCategory",
    "Fixation",
    "GuiType",
    "ParseError",
    "RolloutConfig",
    "SaliencyMap",
    "Scanpath",
    "ValidationError",
    "validate_scanpath",
    "GuiImage",
    "IttiKochSaliency",
    "itti_koch_saliency",
    "load_density_map",
    "load_image",
    "resize",
    "save_density_map",
    "ScanpathPredictor",
    "apply_ior_mask",
    "decay_weight",
    "rollout",
    "MetricReport",
    "RecurrenceConfig",
    "compare",
    "cross_recurrence_matrix",
    "determinism",
    "dtw",
    "eyenalysis",
    "laminarity",
    "PairedTestResult",
    "VisitStats",
    "aggregate",
    "map_fixations_to_elements",
    "paired_t_test",
    "visit_revisit",
    "DatasetManifest",
    "generate_fixture_dataset",
    "load_element_boxes",
    "load_manifest",
    "read_scanpath_csv",
    "write_scanpath_csv",
    "FileDensityBackend",
    "IttiKochBackend",
    "SweepGrid",
    "SweepResult",
    "emit",
    "evaluate_config",
    "run_sweep",
]
