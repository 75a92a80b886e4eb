# dlab/services/__init__.py
