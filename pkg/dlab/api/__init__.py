# dlab/api/__init__.py
