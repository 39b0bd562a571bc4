"""Command-line interface for the QJA simulator."""
