"""embedservice: sentence encoders behind the POST /embed wire contract."""

__version__ = "0.1.0"

from .app import create_app
from .registry import ModelRegistry

__all__ = ["ModelRegistry", "create_app", "__version__"]
