# -*- coding: utf-8 -*-
#
# blindsr documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import sys
from datetime import datetime
from pathlib import Path

# If extensions (or modules to document with autodoc) are in another
# directory, add these directories to sys.path here.
root = Path(__file__).absolute().parent.parent
sys.path.insert(0, str(root))

from blindsr import __version__  # noqa: E402

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
]

autodoc_default_flags = [
    'members',
    'undoc-members',
    'show-inheritance',
]

# Dependencies that are not needed to build the documentation.
autodoc_mock_imports = [
    'matplotlib',
    'psutil',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'blindsr'
copyright = u"{0}, the blindsr developers".format(datetime.now().year)

# The short X.Y version.
version = '.'.join(__version__.split('.')[0:2])
# The full version, including alpha/beta/rc tags.
release = __version__

exclude_patterns = []
pygments_style = 'sphinx'

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_short_title = "blindsr {0}".format(release)
html_static_path = []
htmlhelp_basename = 'blindsrdoc'

# -- Options for intersphinx ----------------------------------------------

intersphinx_mapping = {
    'numpy': ('https://docs.scipy.org/doc/numpy/', None),
    'python': ('https://docs.python.org/3/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/reference/', None),
}
