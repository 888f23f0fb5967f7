"""Homophily estimation from predicted node attributes.

Library plus CLI for estimating average ego-network composition with
node-, dyad-, and ego-alter logistic strategies, and a Monte-Carlo
harness for evaluating their bias and error under several
data-generating processes and sampling designs.
"""

from .errors import (CalibrationError, ConfigError, DegenerateInputError,
                     DegenerateLabelsError, EmptyTrainingSetError,
                     EstimandUndefinedError, HomophilyError,
                     InvalidParameterError, NumericalError, SchemaError)
from .estimators import (DenominatorMode, DyadFrame, EstimateRecord,
                         ModelKind, bias_decomposition, build_design,
                         build_frame, coleman_index, coleman_numerator,
                         coleman_proportion, estimate_homophily,
                         extended_homophily, score_strategy, true_homophily)
from .glm import DesignMatrix, FittedModel, fit_logistic, predict
from .graph import Graph, directed_dyads, from_edges, generate_pa_graph
from .metrics import (bias_and_mae, cv_residual_diagnostic,
                      node_level_metrics, summarize_records)
from .runner import ExperimentConfig, load_config, run_battery
from .sampling import (GroundTruthMask, biased_edge_sample,
                       biased_node_sample, calibrate_alpha,
                       random_edge_sample, random_node_sample)
from .simgen import (DgpKind, NodeTable, gen_features, gen_outcomes,
                     simulate_node_table, standardize)

__version__ = "0.1.0"
