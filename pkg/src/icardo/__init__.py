"""Feature-selection and classifier grid for tabular heart-disease data."""

__version__ = "0.1.0"
