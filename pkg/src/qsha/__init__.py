"""Simulated hybrid quantum-classical SHA-256."""
