"""
Segmentation of satellite image time series with a light-weight encoder-decoder
transformer, implemented on a small numpy autodiff library.
"""
from vistaformer.models.config import ModelConfig, reference_config, micro_config
from vistaformer.models.vistaformer import build_model

__version__ = "0.1.0.dev0"

__all__ = ['ModelConfig', 'reference_config', 'micro_config', 'build_model']
