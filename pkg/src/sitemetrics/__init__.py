"""Plot-level site planning indicators from multi-layer GeoJSON."""

__version__ = "0.1.0"

from .config import IndicatorConfig
from .records import BuildingRecord, Dataset, FormType, LayoutPattern, PlotRecord

__all__ = [
    "IndicatorConfig",
    "Dataset",
    "BuildingRecord",
    "PlotRecord",
    "FormType",
    "LayoutPattern",
    "__version__",
]
