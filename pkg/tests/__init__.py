"""Test package for OpenStack VM API."""
