"""Module entry point for ``python -m genvendor``."""

from .cli import main

if __name__ == "__main__":
    main()
