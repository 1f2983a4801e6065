"""Role action spaces: clustering, representations and transfer."""
