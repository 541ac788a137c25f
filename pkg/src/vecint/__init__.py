"""Maximum-entropy measures, exact fibre counts and intersection analytics
for vector-valued set families."""
from .measures import (
    Fibre,
    PairMeasure,
    ProductMeasure,
    VectorArray,
    array_value,
    boundedness,
    density,
    entropy,
    expected_array_value,
    marginal,
    r_norm,
)

__version__ = "0.1.0"

__all__ = [
    "Fibre",
    "PairMeasure",
    "ProductMeasure",
    "VectorArray",
    "array_value",
    "boundedness",
    "density",
    "entropy",
    "expected_array_value",
    "marginal",
    "r_norm",
]
