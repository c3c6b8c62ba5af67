"""Config, artifact storage, run status, schema checks and seeding for the arena."""
