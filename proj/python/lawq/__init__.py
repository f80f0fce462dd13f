"""Loss-aware weight quantization: ternary, two-scale and m-bit solvers."""

from ._lawq import (
    LawqError,
    QuantKind,
    QuantSet,
    QuantizedLayer,
    Scheme,
    SolveInfo,
    binarize_bwn,
    binarize_lab,
    binarize_sign,
    curvature_from_moments,
    method_label,
    objective,
    oracle,
    precond_step,
    quantize,
    quantize_dorefa,
    quantize_mbit,
    run_cli,
    ternarize_approx,
    ternarize_exact,
    ternarize_twn,
    ternarize_two_scale_approx,
    ternarize_two_scale_exact,
)

__all__ = [
    "LawqError",
    "QuantKind",
    "QuantSet",
    "QuantizedLayer",
    "Scheme",
    "SolveInfo",
    "binarize_bwn",
    "binarize_lab",
    "binarize_sign",
    "curvature_from_moments",
    "method_label",
    "objective",
    "oracle",
    "precond_step",
    "quantize",
    "quantize_dorefa",
    "quantize_mbit",
    "run_cli",
    "ternarize_approx",
    "ternarize_exact",
    "ternarize_twn",
    "ternarize_two_scale_approx",
    "ternarize_two_scale_exact",
]
