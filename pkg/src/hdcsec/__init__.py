"""HDC security workbench.

A hyperdimensional-computing classification pipeline (bit-packed bipolar
vectors, record-based encoding, single-pass training), the item-memory
reasoning attack that recovers an encoder's index mapping from unindexed
hypervector dumps plus encoding queries, and the keyed-encoding defense
that derives feature vectors from rotated base-pool products so the same
attack needs N*(D*P)**L guesses instead of N**2.
"""

__version__ = "0.1.0"

from .encoder import (
    EncoderConfig,
    build_encoder,
    derive_locked_feature_hvs,
    encode,
    encode_binary,
    encoding_cost,
)
from .hv import (
    Accumulator,
    Hypervector,
    add,
    binarize,
    bundle,
    cosine,
    hamming,
    multiply,
    negate,
    random_hypervector,
    rotate,
)
from .item_memory import (
    ItemMemory,
    generate_feature_hvs,
    generate_value_hvs,
    quantize,
    quantize_array,
)
from .keylock import (
    BasePool,
    LockKey,
    attack_complexity,
    baseline_complexity,
    generate_key,
    load_key,
    per_feature_complexity,
    save_key,
    validate_key,
)
from .model import (
    TrainedModel,
    evaluate,
    infer,
    load_model,
    model_from_file,
    predict,
    save_model,
    train,
)
from .rng import Rng

__all__ = [
    "Accumulator",
    "BasePool",
    "EncoderConfig",
    "Hypervector",
    "ItemMemory",
    "LockKey",
    "Rng",
    "TrainedModel",
    "add",
    "attack_complexity",
    "baseline_complexity",
    "binarize",
    "build_encoder",
    "bundle",
    "cosine",
    "derive_locked_feature_hvs",
    "encode",
    "encode_binary",
    "encoding_cost",
    "evaluate",
    "generate_feature_hvs",
    "generate_key",
    "generate_value_hvs",
    "hamming",
    "infer",
    "load_key",
    "load_model",
    "model_from_file",
    "multiply",
    "negate",
    "per_feature_complexity",
    "predict",
    "quantize",
    "quantize_array",
    "random_hypervector",
    "rotate",
    "save_key",
    "save_model",
    "train",
    "validate_key",
]
