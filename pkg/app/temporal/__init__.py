"""Temporal workflow and activities for distributed verification runs."""
