"""Email authorship attribution from stylometric and content features.

Modules: ``corpus`` (loading and cleaning), ``stylometry`` and ``content``
(feature extraction), ``ccm`` (cluster-then-classify model), ``evaluation``
(cross-validation and the unknown-author gate), ``synthetic`` (seeded test
corpora), ``arff`` (export) and ``cli``.
"""

__version__ = "0.1.0"
