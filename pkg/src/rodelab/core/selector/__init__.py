"""Top-level role selector."""
