"""Independent cross-checks of the wedge-angle sweep against the root oracle.

The angle table's measured values disagree with some widely quoted reference
values; these tests pin the measured values to ground truth by scanning
(lambda, mu) grids with the characteristic-root condition directly: no
instability may exist below the measured angle, and instability must exist
just above it.
"""

import math

import numpy as np
import pytest

from imexssp.schemes import char_polys, imex_bdf2, imex_scheme, mcnab, ssp_explicit
from imexssp.stability import explicit_boundary, imex_alpha_sweep, restrict_curve


def unstable_exists_at(s, lams, psi, radii):
    """Any (lambda, mu) pair with mu on the rays at angle psi unstable?"""
    polys = char_polys(s)
    A, B, C = polys.A.astype(complex), polys.B, polys.C
    for sgn in (1.0, -1.0):
        mus = radii * np.exp(1j * (np.pi - sgn * psi))
        for lam in lams:
            base = A - lam * B
            for mu in mus:
                d = base - mu * C
                if abs(d[0]) < 1e-12:
                    continue
                if np.abs(np.roots(d)).max() > 1.0 + 1e-9:
                    return True
    return False


@pytest.mark.parametrize("make_scheme,make_lams", [
    (imex_bdf2, lambda s: explicit_boundary(s, 256).finite_values()),
    (lambda: mcnab(0.5), lambda s: explicit_boundary(s, 256).finite_values()),
])
def test_sweep_is_sharp(make_scheme, make_lams):
    s = make_scheme()
    lam_curve = explicit_boundary(s, 512)
    measured = imex_alpha_sweep(s, lam_curve, 2048).alpha
    lams = make_lams(s)
    radii = np.logspace(-3, 1, 25)
    margin = 0.005 * math.pi
    assert not unstable_exists_at(s, lams, measured - margin, radii), \
        "instability below the measured wedge angle"
    assert unstable_exists_at(s, lams, measured + 2 * margin, radii), \
        "no instability found just above the measured wedge angle"


def test_centred_restricted_region_violates_quarter_pi():
    # For the 3-step centred IMEX scheme with beta=0 the strip-restricted
    # eigenvalue family admits instability well below pi/4: the binding
    # feature sits at the left end of the strip, where the closed-form
    # angle bound does not apply.
    s = imex_scheme("centred", 3, 0.0)
    lam_curve = restrict_curve(explicit_boundary(ssp_explicit(3), 2048), 1 / 3)
    measured = imex_alpha_sweep(s, lam_curve, 2048).alpha
    assert measured < 0.20 * math.pi  # far below pi/4

    on_edge = lam_curve.values[np.isclose(lam_curve.values.imag, -1 / 3)]
    lam = on_edge[np.argmin(on_edge.real)]
    radii = np.logspace(0, 6, 25)
    assert unstable_exists_at(s, [lam], 0.20 * math.pi, radii)
    assert not unstable_exists_at(s, [lam], measured - 0.005 * math.pi, radii)


def test_biased_k3_no_instability_in_left_half_plane():
    # grid version of the A-stability claim, by roots alone
    s = imex_scheme("biased", 3)
    lams = explicit_boundary(s, 128).finite_values()
    radii = np.logspace(-2, 3, 20)
    for psi in (0.1 * math.pi, 0.3 * math.pi, 0.49 * math.pi):
        assert not unstable_exists_at(s, lams, psi, radii)
