"""3D spatiotemporal CNN engine for micro-expression video classification.

Subsystems: kernels (conv/pool hot loops, compiled or numpy), graph
(layer DAG with reverse-mode gradients), models (the three reference
architectures), dataio (clip ingestion, landmark crops, synthesis),
trainer (SGD loop, metrics, checkpoints), saliency (input-gradient
maps), and the `mex3d` command line.
"""

__version__ = "0.1.0"
