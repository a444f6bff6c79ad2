"""Cubic models of S2, S3 and SO(3): representation maps, their distortion,
numeric oracles for the bounds, and a dyadic subdivision atlas with
certified epsilon-covers of the rotation group."""

__version__ = "0.1.0"

from .atlas import (AtlasTree, EpsilonCover, SubdivisionBox, build_epsilon_cover, cover_depth,
                    init_atlas, metric_diameter_bounds, width)
from .cubic import (ChartId, ChartPoint, GlueMap, Model, ModelKind, glue, gluing_table, lift,
                    project, so3_canonicalize, so3_locate_chart)
from .distortion import (DistortionRange, compose, distortion_range_mu, jacobian_mu, jacobian_mu3,
                         metric_distortion, optimal_scale, pullback_form, scaled_model_range,
                         so3_range)
from .errors import InvalidArgument, ResourceError
from .geometry import (UnitQuaternion, dist_s3, phi3, phi6, quat_to_rotation, rotation_angle,
                       rotation_to_quat)
from .oracle import (PLDistanceEstimate, SweepReport, finite_difference_jacobian,
                     pl_distance_approx, pl_distance_same_face, sweep_distance_distortion,
                     sweep_metric_distortion)

__all__ = [
    "AtlasTree", "ChartId", "ChartPoint", "DistortionRange", "EpsilonCover", "GlueMap",
    "InvalidArgument", "Model", "ModelKind", "PLDistanceEstimate", "ResourceError",
    "SubdivisionBox", "SweepReport", "UnitQuaternion", "build_epsilon_cover", "compose",
    "cover_depth", "dist_s3", "distortion_range_mu", "finite_difference_jacobian", "glue",
    "gluing_table", "init_atlas", "jacobian_mu", "jacobian_mu3", "lift", "metric_diameter_bounds",
    "metric_distortion", "optimal_scale", "phi3", "phi6", "pl_distance_approx",
    "pl_distance_same_face", "project", "pullback_form", "quat_to_rotation", "rotation_angle",
    "rotation_to_quat", "scaled_model_range", "so3_canonicalize", "so3_locate_chart", "so3_range",
    "sweep_distance_distortion", "sweep_metric_distortion", "width",
]
