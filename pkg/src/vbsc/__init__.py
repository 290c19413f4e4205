"""Capacity analysis and simulation of the varying binary symmetric channel."""
