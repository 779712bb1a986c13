"""Desk-scale model of the barrier main controller, its properties and the suite runner."""
