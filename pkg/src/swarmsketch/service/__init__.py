"""HTTP/WebSocket service exposing the workbench."""

from .app import create_app

__all__ = ["create_app"]
