"""Use cases of the reconstruction pipeline, one package per workflow."""
