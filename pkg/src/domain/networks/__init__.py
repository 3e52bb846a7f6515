"""Network components: feature extractor, encoding UNet and radiance MLP."""
