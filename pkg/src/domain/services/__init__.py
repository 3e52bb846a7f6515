"""Pure numerical services of the reconstruction pipeline."""
