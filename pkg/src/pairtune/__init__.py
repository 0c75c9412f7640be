"""Black-box configuration tuning with a pairwise comparison classifier.

Settings are measured, every ordered pair of them is folded into one
vector by per-dimension bit interleaving, and a classifier learns which
member of a pair performs better. Candidates predicted to beat the best
measured setting are clustered and the clusters are searched with the
remaining budget.
"""
from .classifier import (DECISION_TREE, GBT, LOGISTIC, ComparisonClassifier, GbtHyperParams,
                         fit_samples, load_model, save_model, train, winner_recall)
from .driver import (EXTERNAL, MAXIMIZE, MINIMIZE, SYNTHETIC, DriverSpec, Sample,
                     SampleDatabase, evaluate, load_db, save_db)
from .errors import (ConfigError, DataFormatError, DegenerateTrainingError, DimensionError,
                     EvaluationError, FingerprintError, InvalidSettingError, ModelFormatError,
                     PairTuneError, RulesFormatError, SpaceFormatError)
from .induction import (ExperienceRule, PairSet, build_training_set, deinterleave,
                        generate_from_rules, induce_pair, interleave, load_rules, quantize)
from .sampling import Box, lhs, lhs_in_box
from .search import (PromisingSubspace, best_cluster_num, bound_subspace, elbow, find_winners,
                     generate_pool, kmeans)
from .space import (ConfigSpace, ParamSpec, denormalize, load_space, normalize, save_space,
                    validate)
from .tuner import (TuningConfig, TuningResult, emit_report, load_report, random_search,
                    sample_initial, tune)

__version__ = "0.1.0"
