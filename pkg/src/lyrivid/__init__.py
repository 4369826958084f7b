"""lyrivid: narrated music videos from raw audio.

Turns a music file into a video: lyric lines generated by a
music-conditioned variational autoencoder, styled prompts, beat-synchronized
interpolation through an illustration backend, and MP4 composition, exposed
through a CLI and an HTTP editing service.
"""

__version__ = "0.1.0"
