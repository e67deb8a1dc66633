"""Numerical laboratory for the warp-function ODE of expanding gradient Yamabe solitons."""
