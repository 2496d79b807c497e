"""Deformed operator algebra, grid quantum mechanics and Bell correlations."""
