"""Runnable demonstrations and timing benchmarks for hybridexec"""
