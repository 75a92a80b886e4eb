# dlab/core/__init__.py
