"""Mini-ML with modular implicits: parser, type inference, implicit
resolution, elaboration to an implicit-free core, and an interpreter."""

__version__ = "0.1.0"
