"""scatrec: image reconstruction from randomly undersampled point measurements.

The package turns scattered noisy samples into a weighted grid measurement,
then minimizes regularized least-squares costs to recover the full image.
Besides quadratic and sparse roughness baselines it provides a coarse-to-fine
multiresolution scheme whose per-level regularizer adapts to the structure of
the previous level's estimate through the eigen-system of its Hessian.
"""

__version__ = "0.1.0"

from .binning import BinnedMeasurement, bin_samples, tanh_weight
from .diffops import (
    EigenField,
    HessianField,
    apply_hessian,
    directional_dd,
    eig2x2,
    roughness_image,
)
from .gridcore import (
    GridSpec,
    Image,
    RegParams,
    SampleSet,
    image_from_array,
    load_image,
    load_samples,
    save_image,
    save_samples,
)
from .metrics import SsimParams, ssim
from .multires import (
    PyramidSchedule,
    ReconstructionDetail,
    build_schedule,
    reconstruct,
    reconstruct_detailed,
    reconstruct_single,
)
from .phantoms import blobs_phantom, filaments_phantom, phantom_by_name, smooth_spots_phantom
from .regularizers import (
    StructureGuide,
    build_guide,
    grad_reg_merr,
    reg_lp,
    reg_merr,
    reg_msda,
    reg_schatten,
)
from .resampling import ResampleOp, binomial_filter, resample
from .simulate import NoiseSpec, add_noise, snr_db, subsample
from .solver import (
    SolveReport,
    SolveSpec,
    SolverOptions,
    box_violation,
    cost_gradient,
    eval_cost,
    solve,
)

__all__ = [
    "__version__",
    "BinnedMeasurement",
    "bin_samples",
    "tanh_weight",
    "EigenField",
    "HessianField",
    "apply_hessian",
    "directional_dd",
    "eig2x2",
    "roughness_image",
    "GridSpec",
    "Image",
    "RegParams",
    "SampleSet",
    "image_from_array",
    "load_image",
    "load_samples",
    "save_image",
    "save_samples",
    "SsimParams",
    "ssim",
    "PyramidSchedule",
    "ReconstructionDetail",
    "build_schedule",
    "reconstruct",
    "reconstruct_detailed",
    "reconstruct_single",
    "blobs_phantom",
    "filaments_phantom",
    "phantom_by_name",
    "smooth_spots_phantom",
    "StructureGuide",
    "build_guide",
    "grad_reg_merr",
    "reg_lp",
    "reg_merr",
    "reg_msda",
    "reg_schatten",
    "ResampleOp",
    "binomial_filter",
    "resample",
    "NoiseSpec",
    "add_noise",
    "snr_db",
    "subsample",
    "SolveReport",
    "SolveSpec",
    "SolverOptions",
    "box_violation",
    "cost_gradient",
    "eval_cost",
    "solve",
]
