"""Conformal Mobius warping, spherical resampling and sphere-weighted
metrics for equirectangular panoramas."""

from .errors import (
    BadDimsError,
    DegenerateArcError,
    DimMismatchError,
    IoError,
    NearSingularError,
    NoCrossingError,
    OmnizoomError,
    TooSmallError,
)
from .geometry import (
    HomogPlanePoint,
    IndexMap,
    MobiusMatrix,
    SphericalCoord,
    SpherePoint,
    ViewControls,
    build_index_map,
    canonicalize,
    from_controls,
    from_rotation,
    homog_stp,
    homog_stp_inv,
    map_sphere,
    mobius_apply,
    mobius_compose,
    mobius_inverse,
    sp,
    sp_inv,
    zoom_at,
)
from .image import ErpImage, load_png, save_png
from .metrics import WeightMap, metric_report, ws_psnr, ws_ssim, ws_weights
from .pipeline import WarpOrder, WarpRequest, downsample, upsample, warp
from .resample import (
    ResampleKernel,
    ResampleStencil,
    make_stencil,
    meridian_cross,
    resample,
    slerp,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
