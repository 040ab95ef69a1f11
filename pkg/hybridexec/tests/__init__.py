"""Unit tests for hybridexec"""
