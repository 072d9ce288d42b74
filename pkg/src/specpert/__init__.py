"""Row-wise eigenvector perturbation toolkit for symmetric random matrices.

Modules
-------
linalg      symmetric eigensolver, windows, 2->inf norms, matrix sign
models      random graph and Gaussian models, samplers, closed-form spectra
metrics     aligned 2->inf distances and projector metrics
bounds      closed-form perturbation bounds and helper functions
clustering  spectral clustering, K-medians, hierarchical sign splitting
mc          seeded Monte Carlo experiments
cli         command-line interface (``specpert``)
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import InputError, NumericalError, SpecpertError  # noqa: E402

__all__ = ["InputError", "NumericalError", "SpecpertError", "__version__"]
