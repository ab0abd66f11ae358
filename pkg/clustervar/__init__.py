# ClusterVAR: sparse VAR learning with shared leading-indicator structure

__version__ = "1.0.0"
