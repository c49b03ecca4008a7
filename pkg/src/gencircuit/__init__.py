"""gencircuit: procedural genetic-circuit benchmarks with hierarchical
verification rewards.

The package covers the full pipeline: a circuit document model with canonical
serialization, a construction DSL, regulatory-graph analysis, five-level
verification, procedural generators with ground truth, flaw injection and
perturbation, NOR-network synthesis with annealed gate assignment, task
building/scoring with curriculum support, and a pool-based refinement loop.
"""

__version__ = "0.1.0"

from .circuit_types import CircuitSpec, CircuitType, FlawType, GroundTruth
from .library import HillParams, PartsLibrary, load_parts_library
from .model import CircuitDocument, deserialize_document, serialize_document
from .script import emit_script, execute_script, parse_script, run_script
from .verify import RewardBreakdown, hierarchical_reward

__all__ = [
    "__version__",
    "CircuitDocument",
    "CircuitSpec",
    "CircuitType",
    "FlawType",
    "GroundTruth",
    "HillParams",
    "PartsLibrary",
    "RewardBreakdown",
    "deserialize_document",
    "emit_script",
    "execute_script",
    "hierarchical_reward",
    "load_parts_library",
    "parse_script",
    "run_script",
    "serialize_document",
]
