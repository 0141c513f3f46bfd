"""Protocol module - box pools, devices and the five verification steps of a game."""
