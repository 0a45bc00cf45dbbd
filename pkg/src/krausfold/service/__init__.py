"""HTTP service exposing the verification, reduction and region tools."""

from .app import create_app

__all__ = ["create_app"]
