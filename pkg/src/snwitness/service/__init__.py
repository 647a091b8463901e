"""HTTP service layer: pydantic models, handlers, FastAPI app."""
from . import handlers, models
from .app import app, create_app

__all__ = ["app", "create_app", "handlers", "models"]
