"""Simulating and checking multi-agent knowledge paradoxes in box world and quantum theory."""
