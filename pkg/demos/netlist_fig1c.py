"""
==================================
Building the ring from a netlist
==================================

The bundled ``fig1c.cir`` describes the two counter-propagating MZIs and the
path-length phase between them. Compiling it must reproduce the round-trip
matrix ``-exp(i psi) R(psi)`` when ``phi = 0``.
"""

import math

import numpy as np

from cbw_gyro.circuit import check, compile_chain, fig1c_source, parse
from cbw_gyro.optics import rotation

source = fig1c_source()
print(source)

ast = parse(source)
print("warnings:", check(ast))

psi = 0.7
ring = compile_chain(ast, "ring", {"psi": psi, "phi": 0.0})
print(np.round(ring, 6))
print("max |ring + exp(i psi) R(psi)| =", np.max(np.abs(ring + np.exp(1j * psi) * rotation(psi))))

# %%
# A path-length phase away from 2 n pi spoils the rotation form.

detuned = compile_chain(ast, "ring", {"psi": psi, "phi": math.pi / 3})
print("output for phi = pi/3:", np.round(detuned[:, 0], 6))
