"""Bottom-level role policies."""
