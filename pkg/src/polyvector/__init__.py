"""Exact calculus of polyvector fields, the Schouten bracket and BV operators."""
