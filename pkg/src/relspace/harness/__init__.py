"""Pipeline orchestration, metrics, file formats and the experiment drivers."""
