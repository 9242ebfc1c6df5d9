"""GINGER entry point."""
import sys

from ginger.main import main

__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"

if __name__ == "__main__":
    sys.exit(main())
