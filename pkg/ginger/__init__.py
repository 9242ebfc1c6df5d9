"""GINGER: grounded information nugget-based generation of responses."""

__project__ = "GINGER"
__description__ = (
    "Retrieval-augmented response generation pipeline that works on "
    "information nuggets extracted from retrieved passages"
)
__url__ = "https://github.com/enzet/ginger"
__doc_url__ = f"{__url__}/blob/main/README.md"
__author__ = "Sergey Vartanov"
__email__ = "me@enzet.ru"
__version__ = "0.1.0"

REQUIREMENTS: list[str] = [
    "numpy>=1.18.1",
    "pytest>=6.2.2",
    "PyYAML>=4.2b1",
    "setuptools>=51.0.0",
    "urllib3>=1.25.6",
]
