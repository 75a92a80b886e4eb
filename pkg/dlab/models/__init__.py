# dlab/models/__init__.py
