"""Random-forest classification of student records, built from first
principles: Gini trees, bagged and random-input ensembles, permutation
and impurity importance, logistic baselines, and a reproducible tabular
pipeline (ingest, split, train, evaluate) behind one CLI.
"""

__version__ = "0.1.0"

from .baseline import (
    LogisticModel,
    MultinomialModel,
    TrainOptions,
    fit_logistic,
    fit_multinomial,
    load_model,
    save_model,
)
from .data import (
    CATEGORICAL,
    CONTINUOUS,
    Dataset,
    SplitIndices,
    stratified_split,
    subsample_without_replacement,
)
from .errors import (
    CategoricalArityError,
    ConfigError,
    DegenerateDataError,
    ModelTaskError,
    NumericError,
    SchemaError,
)
from .forest import (
    EvaluationReport,
    Forest,
    ForestConfig,
    MajorityClassifier,
    WeightedRandomClassifier,
    default_subset_size,
    evaluate,
    fit_forest,
    load_forest,
    predict_forest,
    preset,
    save_forest,
)
from .importance import (
    ImportanceReport,
    gini_importance,
    permutation_importance,
    top_k,
    write_boxplot_svg,
    write_report_csv,
)
from .ingest import LabelRules, Semester, build_cohort, parse_records, parse_semester
from .synth import SynthConfig, generate
from .tree import (
    SplitCondition,
    Tree,
    TreeConfig,
    best_split,
    fit_tree,
    gini,
    gini_from_proportions,
)

__all__ = [name for name in dir() if not name.startswith("_")]
