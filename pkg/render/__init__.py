"""Rendering package for exact-sequence reports and torus pictures."""

