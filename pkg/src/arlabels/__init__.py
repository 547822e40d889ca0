"""Occlusion-free billboard label placement for point-of-interest scenes.

The engine places one upright billboard label per point of interest, lifts
labels that would hide one another (nearer labels win, farther ones rise),
bands detail levels by angular crowding, collapses far-away groups into
aggregate labels, and eases every change so nothing ever jumps.

Typical use::

    from arlabels import LabelEngine, load_example, DevicePose, WorldPosition

    engine = LabelEngine(load_example("theme-park"))
    snapshot = engine.update_frame(DevicePose(WorldPosition(0, 1.6, 0)), t_now=0.0)
"""

__version__ = "0.1.0"

from .bench import BenchRecord, run_bench, scaling_exponent
from .coherence import Transition, fade_alpha, interpolate_position, lerp, retarget
from .datasets import EXAMPLE_NAMES, load_example
from .easing import DEFAULT_EASING, EASING_NAMES, EasingKind, ease
from .geo import (
    DevicePose,
    SortedLabels,
    geodetic_to_local,
    haversine_m,
    horizontal_distance,
    orient_billboard,
    resolve_anchors,
    sort_by_distance,
)
from .layouts import LAYOUTS, gen_circle, gen_grid, gen_line
from .lod import (
    LOD_ELEMENTS,
    LodAssignment,
    SuperLabel,
    aggregate_groups,
    angular_width,
    assign_lods,
)
from .occlusion import (
    BillboardRect,
    DegenerateGeometryError,
    OcclusionReport,
    Ray,
    corner_rays,
    detect_occluder,
    ray_hits_rect,
    resolve_all,
    shift_over,
)
from .pipeline import (
    ConfigError,
    FrameInstrumentation,
    FrameLabel,
    FrameSnapshot,
    LabelEngine,
    ScreenLabel,
    project_to_screen,
    snapshot_to_dict,
    snapshot_to_json_line,
)
from .posescript import PoseScript, load_posescript, pose_at, posescript_from_json
from .scene import (
    SCHEMA_VERSION,
    ColorScale,
    Extent,
    GeoCoordinate,
    LabelGroup,
    LodLevel,
    LodThresholds,
    POI,
    Scene,
    SceneFormatError,
    WorldPosition,
    load_scene,
    save_scene,
    scalar_to_color,
    scene_from_json,
    scene_to_json,
    validate_scene,
)
from .service import DEFAULT_PORT, StreamServer, serve_forever

__all__ = [
    "__version__",
    # scene model
    "SCHEMA_VERSION", "Scene", "POI", "LabelGroup", "WorldPosition", "GeoCoordinate",
    "Extent", "LodLevel", "LodThresholds", "ColorScale", "SceneFormatError",
    "load_scene", "save_scene", "scene_from_json", "scene_to_json", "validate_scene",
    "scalar_to_color",
    # geometry and pose
    "DevicePose", "SortedLabels", "horizontal_distance", "sort_by_distance",
    "geodetic_to_local", "haversine_m", "resolve_anchors", "orient_billboard",
    # occlusion
    "BillboardRect", "Ray", "OcclusionReport", "DegenerateGeometryError",
    "corner_rays", "ray_hits_rect", "detect_occluder", "shift_over", "resolve_all",
    # detail levels and aggregation
    "LOD_ELEMENTS", "LodAssignment", "SuperLabel", "angular_width", "assign_lods",
    "aggregate_groups",
    # transitions
    "EasingKind", "EASING_NAMES", "DEFAULT_EASING", "ease", "Transition",
    "lerp", "interpolate_position", "fade_alpha", "retarget",
    # frame pipeline
    "LabelEngine", "ConfigError", "FrameSnapshot", "FrameLabel", "FrameInstrumentation",
    "ScreenLabel", "project_to_screen", "snapshot_to_dict", "snapshot_to_json_line",
    # scripts, datasets, layouts, benchmarks
    "PoseScript", "posescript_from_json", "load_posescript", "pose_at",
    "EXAMPLE_NAMES", "load_example", "LAYOUTS", "gen_circle", "gen_grid", "gen_line",
    "BenchRecord", "run_bench", "scaling_exponent",
    # streaming service
    "StreamServer", "serve_forever", "DEFAULT_PORT",
]
