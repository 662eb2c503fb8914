# Sphinx configuration for the equiloc documentation.
# Options: https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys

# equiloc is imported from the repository root when the docs are built in place
sys.path.insert(0, os.path.abspath(".."))


# -- Project information -----------------------------------------------------

project = "equiloc"
copyright = "2024, equiloc developers"
author = "equiloc developers"
release = "0.1"


# -- General configuration ---------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx.ext.githubpages",
    "numpydoc",
    "sphinx_automodapi.automodapi",
]
numpydoc_show_class_members = False
automodapi_toctreedirnm = "api"

templates_path = ["_templates"]
exclude_patterns = ["_build", "api"]


# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_static_path = ["_static"]
