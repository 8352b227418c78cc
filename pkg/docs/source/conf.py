# -*- coding: utf-8 -*-
#
# snnuq documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys
sys.path.insert(0, os.path.abspath('../../'))
from snnuq import __version__, __version_info__  # noqa: E402

# -- General configuration ------------------------------------------------

needs_sphinx = '1.3'

extensions = ['sphinx.ext.autodoc',
              'sphinx.ext.todo',
              'sphinx.ext.coverage']

# Heavy runtime dependencies are not needed to render the API pages.
autodoc_mock_imports = ['filelock', 'tabulate', 'matplotlib', 'pandas',
                        'setup']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'snnuq'
copyright = u'2021, the snnuq developers'
author = u'the snnuq developers'

version = ".".join(__version_info__[:2])
release = __version__

language = None
exclude_patterns = []
pygments_style = 'sphinx'
todo_include_todos = True

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'snnuqdoc'

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, 'snnuq', u'snnuq Documentation',
     [author], 1)
]
