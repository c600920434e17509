"""HTTP service wrapping the library; the CLI is a thin client of it."""

from .app import app, create_app
from .models import Envelope

__all__ = ["Envelope", "app", "create_app"]
