"""Roadside LiDAR cooperative localisation."""
