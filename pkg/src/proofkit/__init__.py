"""A first-order proof kernel and proof-theory workbench over string
arithmetic, with a quantifier eliminator and register-machine simulator."""

__version__ = "0.1.0"
