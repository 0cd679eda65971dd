# -*- coding: utf-8 -*-
#
# qkdsim documentation build configuration file.
#
# Build with ``sphinx-build -b html docs/source docs/build/html``.

import os
import sys
sys.path.insert(0, os.path.abspath('../../'))

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
]

source_suffix = '.rst'
master_doc = 'index'

project = 'qkdsim'
copyright = '2026, the qkdsim developers'
author = 'the qkdsim developers'

# The short X.Y version.
version = '0.1dev'
# The full version, including alpha/beta/rc tags.
release = '0.1dev'

exclude_patterns = []
pygments_style = 'sphinx'

# numpy style docstrings only
napoleon_google_docstring = False
napoleon_numpy_docstring = True

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'qkdsimdoc'
