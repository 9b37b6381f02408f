"""Person-probability map export from pretrained segmentation models.

Bridges off-the-shelf semantic segmentation to the matting toolkit: frames
go in, 16-bit per-frame person-probability PNGs come out in the exact
format the toolkit's `smooth` command consumes.
"""

from .export import ExportJob, export_probability_maps, frame_to_probability

__version__ = "0.1.0"

__all__ = ["ExportJob", "export_probability_maps", "frame_to_probability"]
