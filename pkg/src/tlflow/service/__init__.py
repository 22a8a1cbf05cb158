"""HTTP service: project sessions over the engine and lifecycle layers."""

from .app import create_app
from .sessions import ProjectSession, SessionStore

__all__ = ["create_app", "ProjectSession", "SessionStore"]
