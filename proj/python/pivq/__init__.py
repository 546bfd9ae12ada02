"""Permutation-invariant vector quantization toolkit (C++ core bindings)."""

from ._pivq import (
    brute_force_assignment,
    count_paths,
    interpolate,
    kmeanspp_init,
    matching_capacity_bits,
    matching_quantize,
    nearest_capacity_bits,
    nearest_quantize,
    smooth_path,
    solve_assignment,
    standard_vq_capacity_bits,
)

__all__ = [
    "brute_force_assignment",
    "count_paths",
    "interpolate",
    "kmeanspp_init",
    "matching_capacity_bits",
    "matching_quantize",
    "nearest_capacity_bits",
    "nearest_quantize",
    "smooth_path",
    "solve_assignment",
    "standard_vq_capacity_bits",
]

__version__ = "0.1.0"
