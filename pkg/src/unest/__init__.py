"""Hierarchical 3D block-aggregation transformer for volumetric segmentation.

Submodules:
  tensor     - numpy-backed reverse-mode autodiff engine
  blockops   - patch embedding, blockify/deblockify, block aggregation
  model      - encoder/decoder network, parameter and FLOP accounting
  checkpoint - binary weight checkpoint format
  phantom    - synthetic labeled volumes and HU-style preprocessing
  volume_io  - .v3d on-disk volume format
  trainer    - loss, AdamW, warmup-cosine schedule, training loop
  inference  - sliding-window whole-volume prediction
  metrics    - segmentation and volumetric agreement statistics
  cli        - command-line entry point
"""

__version__ = "0.1.0"
