"""Game UI generation pipeline: design-spec IR, deterministic post-processing,
three-tier rasterizer, quality review loop, and analysis harness."""

__version__ = "0.1.0"
