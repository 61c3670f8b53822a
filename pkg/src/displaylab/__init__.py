"""Exact Witt vector, display and Flex computations over small finite rings."""
