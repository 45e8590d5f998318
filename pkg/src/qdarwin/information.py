"""Reduced density matrices, entropies, mutual information, Holevo quantity,
quantum discord, and fragment decoherence factors.

All entropies are in bits (base-2 logarithms).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .analytics import binary_entropy
from .dynamics import BranchingState, PureState

_EIG_TOL = 1e-9


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix; positivity is checked where eigenvalues
    are computed."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got shape {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("matrix entries must be finite")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("matrix is not Hermitian within 1e-12")
        tr = complex(np.trace(m)).real
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"trace must be 1 within 1e-9, got {tr!r}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class FragmentSpec:
    """Ordered, distinct environment-site indices (1-based)."""

    sites: tuple

    def __post_init__(self):
        sites = tuple(int(s) for s in self.sites)
        if len(set(sites)) != len(sites):
            raise ValueError(f"fragment sites must be distinct, got {sites}")
        if any(s < 1 for s in sites):
            raise ValueError(f"fragment sites must be >= 1, got {sites}")
        object.__setattr__(self, "sites", sites)

    def __len__(self):
        return len(self.sites)

    def __iter__(self):
        return iter(self.sites)

    def complement(self, n_env: int) -> "FragmentSpec":
        return FragmentSpec(tuple(s for s in range(1, n_env + 1) if s not in self.sites))


Fragment = Union[FragmentSpec, Sequence[int]]


def _fragment_sites(frag: Fragment, n_env: int) -> tuple:
    sites = FragmentSpec(tuple(frag)).sites
    if any(s > n_env for s in sites):
        raise ValueError(f"fragment sites {sites} exceed environment size {n_env}")
    return sites


def _partition_matrix(psi: PureState, keep: Sequence[int]) -> np.ndarray:
    """Reshape the amplitudes into a (2^|keep|, 2^|rest|) matrix with the kept
    qubits as row index (first kept qubit on the least significant bit)."""
    n = psi.n_qubits
    keep = [int(q) for q in keep]
    if len(set(keep)) != len(keep):
        raise ValueError(f"kept qubits must be distinct, got {keep}")
    if any(q < 0 or q >= n for q in keep):
        raise ValueError(f"kept qubits {keep} out of range 0..{n - 1}")
    traced = [q for q in range(n) if q not in keep]
    tensor = psi.amplitudes.reshape((2,) * n)  # axis a holds qubit n-1-a
    perm = [n - 1 - q for q in reversed(keep)] + [n - 1 - q for q in traced]
    return tensor.transpose(perm).reshape(1 << len(keep), 1 << len(traced))


def reduced_density(psi: PureState, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace of |psi><psi| over every qubit not listed in ``keep``."""
    m = _partition_matrix(psi, keep)
    return DensityMatrix(m @ m.conj().T)


def _entropy_from_eigenvalues(eigs: np.ndarray) -> float:
    if np.min(eigs) < -_EIG_TOL or np.max(eigs) > 1.0 + _EIG_TOL:
        raise ValueError(f"eigenvalues out of [0, 1] beyond tolerance: {eigs}")
    lam = np.clip(eigs, 0.0, 1.0)
    lam = lam[lam > 0.0]
    return float(-np.sum(lam * np.log2(lam)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-Tr[rho log2 rho] in bits, eigenvalues clamped to [0, 1] before the log."""
    return _entropy_from_eigenvalues(rho.eigenvalues())


def subsystem_entropy(psi: PureState, keep: Sequence[int]) -> float:
    """Entropy (bits) of the reduction of a pure state onto ``keep``.

    Computed from the Schmidt spectrum across the (keep | rest) cut, working
    on whichever side is smaller; identical to the entropy of the literal
    reduced density matrix.
    """
    m = _partition_matrix(psi, keep)
    if m.shape[0] <= m.shape[1]:
        gram = m @ m.conj().T
    else:
        gram = m.conj().T @ m
    return _entropy_from_eigenvalues(np.linalg.eigvalsh(gram))


def mutual_information(psi: PureState, frag: Fragment) -> float:
    """I(S:F) = S_S + S_F - S_SF in bits for the system qubit and a fragment."""
    sites = _fragment_sites(frag, psi.n_qubits - 1)
    s_s = subsystem_entropy(psi, [0])
    s_f = subsystem_entropy(psi, list(sites))
    s_sf = subsystem_entropy(psi, [0, *sites])
    return s_s + s_f - s_sf


def fragment_decoherence_factor(bs: BranchingState, frag: Fragment) -> complex:
    """Product of the branch overlaps over the fragment's sites."""
    sites = _fragment_sites(frag, bs.n_env)
    return bs.overlap(sites)


def _branch_entropy(weight_product: float, gamma_sq) -> np.ndarray:
    """Entropy (bits) of a rank-<=2 reduction of a branching state whose two
    branch components have squared overlap ``gamma_sq``; ``weight_product`` is
    |alpha0|^2 |beta0|^2."""
    radicand = np.clip(1.0 - 4.0 * weight_product * (1.0 - np.asarray(gamma_sq)), 0.0, 1.0)
    return binary_entropy(0.5 * (1.0 + np.sqrt(radicand)))


def holevo_branching(bs: BranchingState, frag: Fragment) -> float:
    """Holevo quantity (bits) of a fragment of a singly-branching state.

    Closed form in the squared overlaps of the full environment and of the
    fragment; exact for branching states (checked against the measurement
    oracle below for single-site fragments).
    """
    sites = _fragment_sites(frag, bs.n_env)
    weight = abs(bs.alpha0) ** 2 * abs(bs.beta0) ** 2
    g_env = abs(bs.overlap()) ** 2
    g_frag = abs(bs.overlap(sites)) ** 2
    term_env = _branch_entropy(weight, g_env)
    radicand = np.clip(1.0 - 4.0 * weight * (g_frag - g_env), 0.0, 1.0)
    term_frag = binary_entropy(0.5 * (1.0 + np.sqrt(radicand)))
    return float(term_env - term_frag)


def holevo_grid_oracle(psi: PureState, frag: Fragment, resolution: int = 64) -> float:
    """Variational Holevo quantity for a single-site fragment, minimizing the
    post-measurement system entropy over a grid of projective measurements.

    The grid covers Bloch directions (theta_k, phi_l) with theta at the
    ``resolution`` midpoints of [0, pi] and phi at ``2 * resolution`` points
    of [0, 2*pi); the result is a lower bound on the true Holevo quantity.
    """
    sites = _fragment_sites(frag, psi.n_qubits - 1)
    if len(sites) != 1:
        raise ValueError(f"the measurement oracle handles single-site fragments, got {sites}")
    resolution = int(resolution)
    if resolution < 16:
        raise ValueError(f"resolution must be >= 16, got {resolution}")

    rho_sf = reduced_density(psi, [0, sites[0]]).matrix  # system on the low bit
    s_s = subsystem_entropy(psi, [0])

    theta = (np.arange(resolution) + 0.5) * np.pi / resolution
    phi = np.arange(2 * resolution) * np.pi / resolution
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    nx = (np.sin(tt) * np.cos(pp)).ravel()
    ny = (np.sin(tt) * np.sin(pp)).ravel()
    nz = np.cos(tt).ravel()

    proj_up = np.empty((nx.size, 2, 2), dtype=complex)
    proj_up[:, 0, 0] = 0.5 * (1.0 + nz)
    proj_up[:, 0, 1] = 0.5 * (nx - 1j * ny)
    proj_up[:, 1, 0] = 0.5 * (nx + 1j * ny)
    proj_up[:, 1, 1] = 0.5 * (1.0 - nz)
    eye2 = np.eye(2, dtype=complex)

    avg = np.zeros(nx.size)
    for proj in (proj_up, eye2[None, :, :] - proj_up):
        full = np.einsum("mij,kl->mikjl", proj, eye2).reshape(-1, 4, 4)
        projected = full @ rho_sf @ full
        cond = projected.reshape(-1, 2, 2, 2, 2)
        rho_s = np.einsum("mfsft->mst", cond)  # trace out the fragment bit
        prob = np.real(rho_s[:, 0, 0] + rho_s[:, 1, 1])
        half_gap = np.sqrt(
            0.25 * np.real(rho_s[:, 0, 0] - rho_s[:, 1, 1]) ** 2
            + np.abs(rho_s[:, 0, 1]) ** 2
        )
        ok = prob > 1e-12
        lam = np.zeros_like(prob)
        lam[ok] = np.clip((0.5 * prob[ok] + half_gap[ok]) / prob[ok], 0.0, 1.0)
        entropy = np.where(ok, binary_entropy(lam), 0.0)
        avg += prob * entropy
    return float(s_s - np.min(avg))


def quantum_discord(psi: PureState, bs: BranchingState, frag: Fragment) -> float:
    """D = I(S:F) - Holevo(S:F) in bits; ``psi`` must be the dense expansion
    of ``bs``."""
    return mutual_information(psi, frag) - holevo_branching(bs, frag)
