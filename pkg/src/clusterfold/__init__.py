"""Verified computation of F-polynomials and g-vectors for folded surface
cluster algebras: seed mutation, modified snake-graph matchings, and string
modules over symmetric quiver algebras, cross-checked against one another."""

__version__ = "0.1.0"
