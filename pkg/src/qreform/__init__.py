"""qreform: mining, intent bucketing, and evaluation of buyer query reformulations."""

from qreform.baselines import BaselineConfig, identity_rewrite, run_baseline, theta_r
from qreform.config import MinerConfig, PipelineConfig, PipelinePaths
from qreform.corpus import (DEFAULT_SIGNAL_WEIGHTS, Engagement, NormalizeConfig,
                            SessionEvent, SessionLog, Taxonomy, engagement_score,
                            load_log, normalize, write_log)
from qreform.errors import (ConfigError, InputError, QreformError, SpecError,
                            ValidationError)
from qreform.generator import CategorySpec, GeneratorSpec, generate_synthetic_log
from qreform.intents import (AspectLexicon, IntentBucket, IntentContext,
                             IntentThresholds, RetrievalIndex, assign_bucket,
                             bucketize, export_dataset, read_dataset,
                             recall_similarity, tag_aspects, token_jaccard)
from qreform.metrics import (EvalInstance, EvalReport, bleu, coverage,
                             evaluate, evaluate_at_k, load_predictions,
                             per_type_breakdown, rats, rouge_l, rtfw,
                             token_precision, token_recall, write_predictions)
from qreform.miner import (CoClickGraph, Provenance, QueryPair,
                           build_coclick_graph, mine_all,
                           mine_cross_session_coengaged,
                           mine_cross_session_onehop, mine_in_session,
                           read_pairs, write_pairs)
from qreform.rewritetype import RewriteType, TYPE_ORDER, classify, type_histogram

__version__ = "0.1.0"
