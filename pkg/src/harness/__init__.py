"""Harness module - command-line entry point and Monte-Carlo experiments."""
