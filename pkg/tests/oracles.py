"""Independent reference calculations shared by the unit and acceptance suites."""

import numpy as np


def mna_s21(omega, r0, c_in, c_out, cell, n_cells, seg=None):
    """Nodal analysis of R0 - C_in - [shunt Y, series Z]^N - (line) - C_out - R0.

    Every branch is stamped into a nodal admittance matrix independently of
    the chain-matrix code; the optional line is stamped with its Y parameters.
    """
    out = np.empty(omega.size, dtype=complex)
    for k, w in enumerate(omega):
        z_cell = complex(cell.series_impedance(np.array([w]))[0])
        y_cell = complex(cell.shunt_admittance(np.array([w]))[0])
        # node 0: source side, nodes 1..N+1 ladder, optional line node, last: load
        n_nodes = n_cells + 3 + (1 if seg is not None else 0)
        Y = np.zeros((n_nodes, n_nodes), dtype=complex)

        def branch(a, b, y):
            Y[a, a] += y
            if b is not None:
                Y[b, b] += y
                Y[a, b] -= y
                Y[b, a] -= y

        branch(0, None, 1 / r0)
        branch(0, 1, 1j * w * c_in)
        for i in range(n_cells):
            branch(1 + i, None, y_cell)
            branch(1 + i, 2 + i, 1 / z_cell)
        node = n_cells + 1
        if seg is not None:
            gl = seg.gamma(w) * seg.length
            y11 = 1 / (seg.z0 * np.tanh(gl))
            y12 = -1 / (seg.z0 * np.sinh(gl))
            a, b = node, node + 1
            Y[a, a] += y11
            Y[b, b] += y11
            Y[a, b] += y12
            Y[b, a] += y12
            node += 1
        last = n_nodes - 1
        branch(node, last, 1j * w * c_out)
        branch(last, None, 1 / r0)
        I = np.zeros(n_nodes, dtype=complex)
        I[0] = 1 / r0  # Norton source for V_s = 1
        v = np.linalg.solve(Y, I)
        out[k] = 2 * v[last]
    return out


def explicit_ladder_impedance(cell, n_cells, zs, omega):
    """Walk from the source through shunt Y then series Z, n_cells times."""
    z = np.asarray(zs, dtype=complex)
    for _ in range(n_cells):
        z = 1 / (1 / z + cell.shunt_admittance(omega))
        z = z + cell.series_impedance(omega)
    return z
