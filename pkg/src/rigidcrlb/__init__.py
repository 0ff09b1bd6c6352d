"""Cramer-Rao bounds for rigid body localization."""
