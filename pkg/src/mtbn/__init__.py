"""Modifiable temporal belief networks at a single granularity.

Condensed models are authored as JSON, deployed over a temporal range into an
instance graph with candidate edges gated by mechanism and lag variables, and
queried exactly or by sampling.  See the README for the file format and CLI.
"""

from .compile import CompiledModel, compile_model
from .deploy import (CandidateEdge, DeployedGraph, Instance, candidate_parents,
                     deploy_model)
from .errors import (CapExceededError, CyclicModelError, InconclusiveRunError,
                     InterventionError, MissingRowError, ModelInvalidError,
                     ModelParseError, MtbnError, UnknownInstanceError)
from .exact import (exact_distribution, exact_query, export_bn,
                    joint_probability, joint_probability_given, joint_sum)
from .model import (CondensedModel, Diagnostic, TemporalRange, parse_model,
                    parse_model_file, require_valid, serialize_model,
                    structural_variable_set, validate_model,
                    with_temporal_range)
from .patterns import (apply_intervention, interval_relation, make_abstraction,
                       make_interval, make_interval_relation,
                       make_manipulation, transform_noncausal)
from .sample import (SampleRun, SimulationResult, forward_simulate,
                     likelihood_weighting_query, logic_sampling_query)
from .structure import (CertificationReport, Structure, ancestral_ordering,
                        check_well_defined, enumerate_structures,
                        is_acyclic, is_ancestral_ordering, structure_by_index,
                        structure_count, structural_constraint_set)

__version__ = "0.1.0"

__all__ = [
    "CandidateEdge", "CapExceededError", "CertificationReport",
    "CompiledModel", "CondensedModel", "CyclicModelError", "DeployedGraph",
    "Diagnostic",
    "InconclusiveRunError", "Instance", "InterventionError",
    "MissingRowError", "ModelInvalidError", "ModelParseError", "MtbnError",
    "SampleRun", "SimulationResult", "Structure", "TemporalRange",
    "UnknownInstanceError", "ancestral_ordering", "apply_intervention",
    "candidate_parents", "check_well_defined", "compile_model",
    "deploy_model",
    "enumerate_structures", "exact_distribution", "exact_query", "export_bn",
    "forward_simulate", "interval_relation", "is_acyclic",
    "is_ancestral_ordering", "joint_probability", "joint_probability_given",
    "joint_sum", "likelihood_weighting_query", "logic_sampling_query",
    "make_abstraction", "make_interval", "make_interval_relation",
    "make_manipulation", "parse_model", "parse_model_file", "require_valid",
    "serialize_model", "structural_constraint_set", "structural_variable_set",
    "structure_by_index", "structure_count", "transform_noncausal",
    "validate_model", "with_temporal_range",
]
