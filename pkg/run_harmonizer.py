#!/usr/bin/env python3
"""
harmonizer run.py
"""
from harmonizer.cli.main import main

if __name__ == "__main__":
    main()
