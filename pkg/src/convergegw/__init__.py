"""Converged dashboard gateway: web widgets, feeds, and simulated telecom
enablers behind one origin, one login, and one per-user layout."""

from .config import GatewayConfig
from .gateway import Gateway

__all__ = ["Gateway", "GatewayConfig"]
__version__ = "0.1.0"
