"""Path-integral simulation of rotational excitation by laser pulse trains."""

__version__ = "0.1.0"
