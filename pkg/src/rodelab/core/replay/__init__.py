"""Episodic replay storage."""

from rodelab.core.replay.buffer import (
    BufferNotReadyError,
    Episode,
    EpisodeBatch,
    EpisodeBuffer,
    EpisodeBuilder,
    EpisodeTooLongError,
    push_episode,
    sample_batch,
)

__all__ = [
    "BufferNotReadyError",
    "Episode",
    "EpisodeBatch",
    "EpisodeBuffer",
    "EpisodeBuilder",
    "EpisodeTooLongError",
    "push_episode",
    "sample_batch",
]
