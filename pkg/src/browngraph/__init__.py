"""Brownian graph Fourier decay, Ito machinery and toral equidistribution experiments."""
