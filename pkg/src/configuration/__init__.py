"""Settings, logging setup and dependency wiring."""
