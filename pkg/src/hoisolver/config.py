"""Dataclass configuration for solver, optimizer, and pipeline.

Every numeric default below is overridable from a JSON config file passed to
the CLI / pipeline; see README for the key layout.
"""

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path


@dataclass
class SolverOptions:
    """Stage-one rigid pose least squares."""

    w_3d: float = 1.0        # weight on 3D-3D residuals (meter scale)
    w_2d: float = 2e-6       # weight on 3D-2D residuals (pixel scale); kept
                             # small because pixel-row influence scales with
                             # (focal/depth)^2, not with residual magnitude
    lm_lambda0: float = 1e-3
    lm_lambda_up: float = 10.0
    lm_lambda_down: float = 0.1
    lm_lambda_max: float = 1e12
    max_iters: int = 100
    cost_tol: float = 1e-10  # relative cost decrease
    grad_tol: float = 1e-8   # gradient infinity norm


@dataclass
class IkOptions:
    damping: float = 0.1
    max_iters: int = 30
    tol: float = 1e-4        # per-target position tolerance, meters


@dataclass
class LossWeights:
    """Composite refinement loss: w_c * contact + w_coll * collision + w_m * mask."""

    w_c: float = 1.0
    w_coll: float = 0.5
    w_m: float = 0.1
    alpha: float = 1.0       # mask MSE term
    beta: float = 0.01       # edge term
    lambda_h2o: float = 2.0  # human-inside-object emphasis in the collision loss
    eps: float = 1e-3        # contact-weight stabilizer, meters

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")


@dataclass
class RefineOptions:
    iters: int = 20
    lr_translation: float = 1e-2  # meters per unit gradient step
    lr_rotation: float = 5e-3     # radians per unit gradient step
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    collision_samples: int = 200  # human proxy surface samples per capsule set


@dataclass
class RasterOptions:
    sigma: float = 1.0       # soft-edge width in pixels
    max_dim: int = 256       # loss-time downsample bound
    fd_step_rot: float = 1e-3
    fd_step_t: float = 1e-3


@dataclass
class PipelineConfig:
    keyframe_stride: int = 3
    chain_depth: int = 3
    cutoff_hz: float = 4.0
    solver: SolverOptions = field(default_factory=SolverOptions)
    ik: IkOptions = field(default_factory=IkOptions)
    weights: LossWeights = field(default_factory=LossWeights)
    refine: RefineOptions = field(default_factory=RefineOptions)
    raster: RasterOptions = field(default_factory=RasterOptions)

    def to_dict(self):
        return asdict(self)

    @staticmethod
    def from_dict(doc):
        cfg = PipelineConfig()
        nested = {"solver": SolverOptions, "ik": IkOptions, "weights": LossWeights,
                  "refine": RefineOptions, "raster": RasterOptions}
        for key, value in doc.items():
            if key in nested:
                setattr(cfg, key, nested[key](**value))
            elif hasattr(cfg, key):
                setattr(cfg, key, value)
            else:
                raise KeyError(f"unknown config key: {key}")
        return cfg

    @staticmethod
    def load(path) -> "PipelineConfig":
        return PipelineConfig.from_dict(json.loads(Path(path).read_text()))
