"""Valuation networks, fusion and conditional independence."""
