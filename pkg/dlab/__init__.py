# dlab/__init__.py
# dirichlet-lab: numerical workbench for Hardy spaces of Dirichlet series

__version__ = "0.3.0"
