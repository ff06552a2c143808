"""Binary Gaussian boson sampling graph kernels."""

__version__ = "0.1.0"
