"""Tests for the lowres-nmt toolkit."""
