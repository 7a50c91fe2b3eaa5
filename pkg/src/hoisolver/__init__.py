"""Contact-annotation driven 4D human-object interaction reconstruction.

Two-stage optimization: a weighted least-squares rigid object pose solve over
annotated 3D-3D and 3D-2D point pairs followed by limb IK, then gradient
refinement under contact, collision, and silhouette losses with keyframe
interpolation and zero-phase low-pass smoothing. Ships motion-quality metrics,
imitation reward functions, a CLI, and an annotation HTTP service.
"""

from .config import (IkOptions, LossWeights, PipelineConfig, RasterOptions,
                     RefineOptions, SolverOptions)
from .geometry import (CameraModel, PointCloud, RigidPose, align_to_depth,
                       compose, inverse, project, transform_point, unproject)
from .mesh import TriangleMesh, load_mesh, load_point_cloud
from .metrics import (ContactLabels, MotionSequence, RewardState, contact_score,
                      jitter, kp_contact_reward, label_reward, mpjpe,
                      tracking_reward)
from .optimizer import (ContactPair, FrameState, collision_loss, contact_loss,
                        interpolate_frames, mask_loss, refine_frame,
                        smooth_sequence)
from .pipeline import PipelineResult, run_pipeline, write_results
from .session import SceneSession, load_motion, load_session, save_session
from .silhouette import (distance_transform, extract_edges, occlusion_mask,
                         rasterize_silhouette)
from .skeleton import (SkeletonModel, SkeletonPose, chain_mask,
                       forward_kinematics, load_skeleton, solve_limb_ik)
from .solver import (Correspondence3D2D, Correspondence3D3D, SolveReport,
                     estimate_static_pose, solve_rigid_pose)

__version__ = "0.1.0"
