"""
Test suite for the event-driven query expansion toolkit.
"""
