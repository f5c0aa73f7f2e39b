"""HTTP service wrapping the define/plan/execute/monitor pipeline."""

from .app import PHASES, ServiceConfig, create_app
from .store import SessionStore, StoreError

__all__ = [
    "PHASES",
    "ServiceConfig",
    "SessionStore",
    "StoreError",
    "create_app",
]
