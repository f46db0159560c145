"""Tests for qws."""
