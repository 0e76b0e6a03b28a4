# -*- coding: utf-8 -*-
#
# ctda documentation build configuration file.
import pkg_resources
import time

project = 'ctda'
author = 'the ctda developers'
copyright = '%d, %s' % (time.localtime().tm_year, author)

try:
    version = release = pkg_resources.get_distribution('ctda').version
except pkg_resources.DistributionNotFound:
    version = release = 'unknown'

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'
exclude_patterns = []
pygments_style = 'sphinx'

html_theme = 'sphinx_rtd_theme'
html_static_path = ['_static']
htmlhelp_basename = 'ctdadoc'

latex_documents = [
    (master_doc, 'ctda.tex', 'ctda Documentation', author, 'manual'),
]
man_pages = [
    (master_doc, 'ctda', 'ctda Documentation', [author], 1),
]
