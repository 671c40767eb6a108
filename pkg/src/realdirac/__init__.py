"""Real Clifford-algebra formulation of Dirac spinors.

Submodules:

* ``clifford``: Cl(p, q) multivectors and a dense batched product kernel.
* ``rotors``: exponentials, rotations, polar form and idempotents.
* ``bridge``: maps between real even multivectors and complex column spinors.
* ``fields``: closed-form and lattice multivector fields.
* ``gauge``: covariant derivative, gauge transformations and field strengths.
* ``solver``: plane waves and 1+1D evolution of the real equation.
* ``verify``: seeded randomized identity suites.
* ``cli``: the ``realdirac`` command.
"""

__version__ = "0.1.0"
