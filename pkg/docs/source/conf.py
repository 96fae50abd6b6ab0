"""Sphinx configuration for the sumsquares documentation"""

import sphinx_rtd_theme

import sumsquares

project = "Sumsquares"
author = "Sumsquares contributors"
copyright = f"2026, {author}"
version = release = sumsquares.__version__

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.autosectionlabel",
    "sphinx.ext.autosummary",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "IPython.sphinxext.ipython_console_highlighting",
    "numpydoc",
    "sphinx_copybutton",
    "sphinx_click.ext",
]

# Section labels are referenced as document:section (e.g. cli:CLI Reference)
autosectionlabel_prefix_document = True
# Module docstrings carry autosummary tables; generate their pages on build
autosummary_generate = True
numpydoc_show_class_members = False

master_doc = "index"
source_suffix = ".rst"
pygments_style = "sphinx"

html_theme = "sphinx_rtd_theme"
html_theme_path = [sphinx_rtd_theme.get_html_theme_path()]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3/", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
    "pandas": ("https://pandas.pydata.org/docs/", None),
    "click": ("https://click.palletsprojects.com/en/stable/", None),
}
