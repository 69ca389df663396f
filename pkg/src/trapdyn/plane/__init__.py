"""plane subpackage (under construction)."""
