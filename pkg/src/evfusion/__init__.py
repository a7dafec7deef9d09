"""Uncertainty-aware late fusion of per-modality classifier logits.

Logits become Dirichlet evidence, each modality becomes a subjective-logic
opinion, and opinions are combined with Dempster's rule before being mapped
back to class probabilities.
"""

from ._backend import BACKEND
from .datasetio import EvalReport, LabelTaxonomy, LogitRecord, load_records, load_taxonomy, write_report
from .evidence import (
    DirichletParams,
    Opinion,
    advanced_evidence,
    basic_evidence,
    dirichlet_to_opinion,
    evidence_to_dirichlet,
)
from .frameselect import FrameScoreSequence, select_best_frame
from .fusion import (
    FusionResult,
    TotalConflictError,
    ds_combine,
    ds_combine_oracle,
    fuse_record,
    fuse_sequence,
    opinion_to_probabilities,
)
from .metrics import (
    Prediction,
    accuracy_neutral_tolerant,
    accuracy_standard,
    confusion,
    fallback_rate,
)

__version__ = "0.1.0"
