"""Domain entities and value objects. Import from the submodules directly."""
