"""Handshake state machines."""
