"""Nanowire dynamic memory cell simulator."""
