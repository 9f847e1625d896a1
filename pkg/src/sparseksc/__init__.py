"""Sparse kernel spectral clustering with incomplete-Cholesky low-rank models.

Submodules are loaded lazily so that the command-line entry point can apply
the KSC_THREADS cap before the numeric stack is imported.
"""

import importlib

__version__ = "0.1.0"

_EXPORTS = {
    "KernelSpec": "kernels",
    "kernel_eval": "kernels",
    "kernel_column": "kernels",
    "kernel_cross": "kernels",
    "IcdResult": "icd",
    "icd": "icd",
    "dense_pivoted_cholesky_oracle": "icd",
    "EigenBundle": "eigensolve",
    "approx_degrees": "eigensolve",
    "center_scale": "eigensolve",
    "leading_eigenpairs_proposed": "eigensolve",
    "leading_eigenpairs_original": "eigensolve",
    "SparseKscModel": "model",
    "TrainConfig": "model",
    "TrainDetails": "model",
    "solve_reduced_coefficients": "model",
    "bias_terms_proposed": "model",
    "bias_terms_original": "model",
    "scores": "model",
    "fit_prototypes": "model",
    "assign": "model",
    "fit_model": "model",
    "train": "model",
    "TuneConfig": "selection",
    "TuneReport": "selection",
    "GridPoint": "selection",
    "blf_criterion": "selection",
    "bas_criterion": "selection",
    "tune": "selection",
    "Dataset": "data",
    "generate_two_spirals": "data",
    "save_csv": "data",
    "load_csv": "data",
    "save_labels": "data",
    "load_labels": "data",
    "adjusted_rand_index": "metrics",
    "pairwise_f_measure": "metrics",
    "LabeledImage": "images",
    "read_ppm": "images",
    "write_ppm": "images",
    "read_pgm": "images",
    "write_pgm": "images",
    "minimum_variance_quantize": "images",
    "quantization_error": "images",
    "image_to_histogram_dataset": "images",
    "save_model": "model_io",
    "load_model": "model_io",
    "KscError": "errors",
    "FactorizationError": "errors",
    "DegreeError": "errors",
    "EncodingError": "errors",
    "ModelFormatError": "errors",
    "ImageFormatError": "errors",
}

__all__ = sorted(_EXPORTS)


def __getattr__(name):
    if name in _EXPORTS:
        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        value = getattr(module, name)
        globals()[name] = value
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return __all__ + [n for n in globals() if not n.startswith("_")]
