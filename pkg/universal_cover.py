#!/usr/bin/env python3
"""
Universal Cover CLI - Main entry point wrapper

The codebase is organized as:
- universal_cover/ - solver library (model, submodular, lpcore, setcover,
  facility, multicut, edgecover, verify)
- universal_cover/solver.py - dispatcher used by the commands
- universal_cover/commands/ - Command modules
- cli.py - Main CLI entry point

This file serves as a convenience wrapper.
"""
import sys

from cli import run

if __name__ == '__main__':
    sys.exit(run())
