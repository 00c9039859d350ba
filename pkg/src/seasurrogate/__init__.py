"""Wave-field synthesis, a vessel-motion oracle and recurrent surrogates."""

__version__ = "0.1.0"
