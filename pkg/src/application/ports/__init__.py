"""Ports owned by the application layer."""
