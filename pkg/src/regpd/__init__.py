"""Regional multi-scale prediction-difference saliency for black-box image classifiers."""

from ._accel import backend_name
from .background import (BackgroundModel, ClusterResult, estimate_background, mean_shift,
                         region_mean_colors, sample_exclusion)
from .classifiers import (AreaFractionOracle, ClassifierHandle, ConstantOracle, TwoBlobOracle,
                          call_count, open_external, open_interchange)
from .difference import DifferenceFunction
from .engines import (BaselineConfig, PDConfig, TabularInstance, pixelwise_pd, regional_pd,
                      tabular_pd)
from .evaluation import PRCurve, binarize, pr_at, sweep
from .imagery import (BinaryMask, RasterImage, SaliencyMap, load_image, load_mask,
                      read_saliency, save_saliency)
from .segmentation import ScaleLadder, SegmentationMap, boundary_regions, segment, segment_ladder

__version__ = "0.1.0"

__all__ = [
    "AreaFractionOracle", "BackgroundModel", "BaselineConfig", "BinaryMask", "ClassifierHandle",
    "ClusterResult", "ConstantOracle", "DifferenceFunction", "PDConfig", "PRCurve", "RasterImage",
    "SaliencyMap", "ScaleLadder", "SegmentationMap", "TabularInstance", "TwoBlobOracle",
    "backend_name", "binarize", "boundary_regions", "call_count", "estimate_background",
    "load_image", "load_mask", "mean_shift", "open_external", "open_interchange", "pixelwise_pd",
    "pr_at", "read_saliency", "region_mean_colors", "regional_pd", "sample_exclusion",
    "save_saliency", "segment", "segment_ladder", "sweep", "tabular_pd",
]
