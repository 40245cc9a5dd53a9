"""HTTP session service package."""
