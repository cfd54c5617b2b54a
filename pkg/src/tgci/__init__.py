"""Theory-guided constructive induction toolkit.

Parse propositional AND/OR/NOT domain theories, redescribe classified
attribute-value examples as partial-match feature vectors, train a
C4.5-style decision tree on the redescription, and reproduce the associated
learning-curve, baseline, and theory-proximity experiments.
"""

from .errors import (
    TgciError,
    TheoryError,
    DatasetError,
    InterpreterError,
    LearnerError,
    EvaluationError,
    PerturbationError,
)
from .theory import Condition, TheoryNode, Theory, parse_theory, validate, fragment, render_theory
from .dataset import (
    Schema,
    Example,
    Dataset,
    position_labels,
    load_sequence_format,
    load_tabular,
    to_sequence_text,
    to_tabular_text,
    partition,
)
from .interpreter import (
    InterpreterOptions,
    ConstructedFeature,
    ConstructedSchema,
    RedescribedExample,
    tgci1,
    boolean_interpret,
    redescribe,
    redescribed_to_csv,
)
from .learner import (
    FeatureSpec,
    LearnerParams,
    SplitTest,
    TreeNode,
    DecisionTree,
    Table,
    table_from_dataset,
    table_from_redescription,
    train,
    predict,
    render_tree,
    tree_to_dict,
)
from .evaluation import (
    CurvePoint,
    RunReport,
    TheoryOnlyResult,
    PairedTestResult,
    theory_only_classify,
    learning_curve,
    leave_one_out,
    paired_significance,
)
from .perturbation import (
    ProximitySpec,
    SweepPoint,
    intended_disjunct,
    perturb,
    proximity_sweep,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
