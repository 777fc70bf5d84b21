"""Answer set grammar learning from CFG-guided sampling, and constrained decoding."""
from .asg import AnnotatedGrammar, evaluate_tree, member, parse_asg
from .asg_mask import ASGMask, asg_valid_next_tokens
from .config import RunConfig, load_config, parse_config
from .earley import CFGMask, parse_forest, recognize, valid_next_tokens, viable_prefix
from .equivalence import equivalence_check
from .errors import *  # noqa: F401,F403
from .grammar import END, Grammar, ParseTree, Vocabulary, parse_grammar
from .learner import TemplateConfig, generate_space, learn
from .oracle import ExampleSet, Oracle, label, make_oracle, split_dedup
from .sampling import GeneratorConfig, ProblemInstance, explore, masked_step

__version__ = "0.1.0"
