"""Delegated-access stack: auth service (KDC), website, agent client, harness."""

__version__ = "0.1.0"
