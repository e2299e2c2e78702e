"""Whitehead's algorithm for primitive elements and free factors of free groups,
Stallings core graphs, and distances in the free factor complex."""

from .algorithms import (
    Certificate,
    HypothesisError,
    WitnessResult,
    build_z_word,
    find_nonprimitive_witness,
    is_free_factor,
    is_primitive,
    relative_whitehead_step,
    relative_whitehead_step_subgroup,
    whitehead_step,
)
from .factor_complex import (
    DistanceResult,
    FactorClass,
    SearchMemo,
    StateCapExceeded,
    class_of,
    distance,
    distance_four_partial,
    distance_one,
    distance_three,
    distance_two,
    distance_zero,
)
from .graphs import (
    LabeledGraph,
    SubgroupPresentation,
    core,
    find_label_morphisms,
    fold,
    graph_from_words,
    graphs_isomorphic,
    pointed_core,
    pullback,
    subgroup_core,
)
from .whitehead import (
    WhiteheadGraph,
    apply_whitehead_to_subgroup,
    collapse_quotient,
    find_cut_vertex,
    subdivide,
    trichotomy,
    whitehead_graph_of_graph,
    whitehead_graph_of_word,
)
from .words import (
    CyclicWord,
    ParseError,
    WhiteheadAutomorphism,
    Word,
    apply_whitehead_to_word,
    cyclic_reduce,
    free_reduce,
    is_fine_on_word,
)

__version__ = "0.1.0"
