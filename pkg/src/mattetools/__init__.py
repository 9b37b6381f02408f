"""Toolkit for synthetic video-matting training data and temporal matting QA.

Submodules:

* :mod:`mattetools.imgcore` -- warping, resampling, compositing, masks
* :mod:`mattetools.fakemotion` -- multi-scale synthetic motion for portraits
* :mod:`mattetools.clipforge` -- training-clip assembly and augmentation
* :mod:`mattetools.blockflow` -- block-matching flow and consistency maps
* :mod:`mattetools.probsmooth` -- probability-map smoothing and trimaps
* :mod:`mattetools.matteval` -- losses and temporal quality metrics
* :mod:`mattetools.fileio` -- PNG and Middlebury .flo interchange
* :mod:`mattetools.cli` -- command-line entry point
"""

__version__ = "0.1.0"
