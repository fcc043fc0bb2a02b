# Sphinx configuration for the qgraphpy API reference.
# https://www.sphinx-doc.org/en/master/usage/configuration.html

import os
import sys

sys.path.insert(0, os.path.abspath(".."))

import qgraphpy  # noqa: E402

project = "qgraphpy"
copyright = "2026, qgraphpy developers"
author = "qgraphpy developers"
release = qgraphpy.__version__

extensions = ["sphinx.ext.autodoc", "sphinx.ext.napoleon"]
autodoc_member_order = "bysource"

templates_path = ["_templates"]
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]

html_theme = "alabaster"
html_static_path = ["_static"]
