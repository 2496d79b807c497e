"""Apps provided by this application."""
