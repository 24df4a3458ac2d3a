"""linkforge: link noisy scholarly metadata records to a clean reference corpus."""

__version__ = "0.1.0"
