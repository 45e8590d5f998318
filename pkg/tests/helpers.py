"""Shared test utilities: independent oracles and state builders."""

import numpy as np

import qdarwin as q

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

AXES = "xyz"


def kron_pauli(n_qubits, ops):
    """Pauli string by explicit Kronecker products (qubit 0 least significant)."""
    out = np.ones((1, 1), dtype=complex)
    for qubit in reversed(range(n_qubits)):
        out = np.kron(out, PAULI[ops.get(qubit, "i")])
    return out


def oracle_hamiltonian(instance):
    """Independent Hamiltonian builder used to cross-check the package's."""
    n = instance.n_env + 1
    dim = 1 << n
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            for a in range(3):
                for b in range(3):
                    coeff = instance.j_tensor[i, j, a, b]
                    if coeff:
                        h += coeff * kron_pauli(n, {i: AXES[a], j: AXES[b]})
    for site in range(n):
        for c in range(3):
            coeff = instance.fields[site, c]
            if coeff:
                h += coeff * kron_pauli(n, {site: AXES[c]})
    return h


def bell_branching():
    """Two balanced sites at B*t = pi/4: the site overlap vanishes and the
    global state is maximally entangled across the system/site cut."""
    r = 2 ** -0.5
    init = q.ProductCoeffs(np.array([[r, r], [r, r]]))
    return q.evolve_branching(init, [1.0], np.pi / 4)


def random_branching(rng, n_env, t_range=(0.2, 3.0)):
    init = q.random_product_state(n_env + 1, rng)
    fields = rng.uniform(-1.0, 1.0, n_env)
    t = float(rng.uniform(*t_range))
    return q.evolve_branching(init, fields, t)


def small_overlap_branching(rng, n_env=6, t=1.0):
    """Branching state with every site overlap magnitude at most 0.2.

    With site weight a^2 near 1/2 and cos(4Bt) near -1 the squared overlap
    a^4 + b^4 + 2 a^2 b^2 cos(4Bt) stays below 0.04.
    """
    a2 = rng.uniform(0.47, 0.53, n_env)
    cos4bt = rng.uniform(-1.0, -0.93, n_env)
    fields = np.arccos(cos4bt) / (4.0 * t)
    phases = rng.uniform(0.0, 2.0 * np.pi, (n_env, 2))
    coeffs = np.stack(
        [
            np.sqrt(a2) * np.exp(1j * phases[:, 0]),
            np.sqrt(1.0 - a2) * np.exp(1j * phases[:, 1]),
        ],
        axis=1,
    )
    u0 = float(rng.uniform(0.2, 0.8))
    sys_pair = np.array([[np.sqrt(u0), np.sqrt(1.0 - u0)]])
    init = q.ProductCoeffs(np.concatenate([sys_pair, coeffs]))
    bs = q.evolve_branching(init, fields, t)
    assert max(abs(bs.site_overlap(s)) for s in range(1, n_env + 1)) <= 0.2
    return bs


def random_generic_instance(rng, n_env):
    """Dense random instance with all axes and fields populated."""
    n = n_env + 1
    jt = np.zeros((n, n, 3, 3))
    for i in range(n):
        for j in range(i + 1, n):
            jt[i, j] = rng.uniform(-1.0, 1.0, (3, 3))
    fields = rng.uniform(-1.0, 1.0, (n, 3))
    return q.ModelInstance(n_env=n_env, j_tensor=jt, fields=fields)
