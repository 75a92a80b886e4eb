# dlab/utils/__init__.py
