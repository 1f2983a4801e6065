"""Effect-based action representation learning."""
