"""irforge: forge synthetic IR test collections and evaluate systems on them."""

__version__ = "0.1.0"
