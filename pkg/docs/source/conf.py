# -*- coding: utf-8 -*-
#
# realensemble documentation build configuration file
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
import os
import sphinx_bootstrap_theme

# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here.
sys.path.insert(0, os.path.abspath(os.path.join('..', '..')))

import realensemble

repo_name = 'realensemble'

version = realensemble.__version__
release = realensemble.__version__

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.autosummary',
    'sphinxcontrib.napoleon',
]

autosummary_generate = True

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = repo_name
exclude_patterns = []
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'bootstrap'
html_theme_path = sphinx_bootstrap_theme.get_html_theme_path()
htmlhelp_basename = '{0}-Docs'.format(repo_name)

intersphinx_mapping = {'http://docs.python.org/': None,
                       'http://docs.scipy.org/doc/numpy/': None,
                       'http://docs.scipy.org/doc/scipy/reference/': None}
