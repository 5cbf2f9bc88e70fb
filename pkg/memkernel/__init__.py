"""Direct, inverse and mixed problems for convolution integro-differential
equations u'' = h*Au + f and u' = l*Au + f, solved mode by mode on the
eigenbasis of a self-adjoint operator A."""

__version__ = "0.1.0"
