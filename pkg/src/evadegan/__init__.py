"""Constrained adversarial traffic generation against NSL-KDD intrusion detectors.

The pipeline: parse and min-max encode NSL-KDD records (`nslkdd`), derive
per-attack feature-modifiability masks (`masks`), train black-box detectors
(`detectors`), train a weight-clipped adversarial generator/critic pair
against them (`gan`, on the `nn` numerics core), and measure detection-rate
collapse and evasion increase over the experiment grid (`evaluate`).
"""

from . import detectors, evaluate, gan, masks, nn, nslkdd, synthetic

__all__ = ["detectors", "evaluate", "gan", "masks", "nn", "nslkdd", "synthetic"]

__version__ = "0.1.0"
