"""Executable property suites, the verification plan DSL and the local runner."""
