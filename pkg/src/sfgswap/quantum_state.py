"""Discrete density matrices, binned herald measurement, purity, negativity.

States live on the tensor product of the two bystander frequency grids;
the composite index is m = j * dim_b2 + k with j the first-bystander
(idler-side) index and k the second-bystander (signal-side) index.  An
optional leading vacuum slot (index 0, with the biphoton block shifted
by one) represents states that are mixtures or superpositions of vacuum
and a photon pair.

Negativity is computed from the partial transpose over the first
bystander.  Every call evaluates both the eigenvalue-sum and the
trace-norm forms and insists they agree; disagreement raises rather
than returning a silently wrong entanglement measure.

For production grid sizes the conditional density matrices are never
diagonalized directly: a herald bin mixes only Q pure projections, so
the state is supported on the joint row/column spaces of the Q amplitude
slices.  Rotating into singular bases of the stacked slices compresses
the matrix onto an (r_L * r_R)-dimensional subspace by a local isometry
on each bystander, which leaves purity and the partial-transpose
spectrum invariant (up to an explicitly controlled truncation residual).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .constants import TWO_PI
from .errors import (
    ConfigurationError,
    HeraldImpossibleError,
    MemoryBudgetError,
    NumericalConsistencyError,
)

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
DIAGONAL_TOL = -1e-14
ROUTE_AGREEMENT_TOL = 1e-10
EIGENVALUE_CLIP = 1e-12

# default relative singular-value cutoff for the low-rank herald-bin
# compression; the retained-basis reconstruction residual is checked on
# every use and reported in the metrics record
DEFAULT_RANK_RTOL = 1e-7

# dense-matrix guard: complex128 entries allowed in one materialized
# density matrix before the memory-budget error fires (256 MB)
DEFAULT_MAX_ELEMENTS = 16_777_216


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian unit-trace matrix over the two bystander grids.

    entries[m, m'] with m = j * dim_b2 + k; when vacuum_slot is set the
    matrix is (dim_b1 * dim_b2 + 1)-dimensional and index 0 is the
    vacuum level (an extra orthogonal level of the composite system,
    |vac> = |vac_1>|vac_2>).
    """

    entries: np.ndarray
    dim_b1: int
    dim_b2: int
    vacuum_slot: bool = False

    def __post_init__(self):
        if self.dim_b1 < 1 or self.dim_b2 < 1:
            raise ValueError(f"subsystem dimensions must be >= 1, got ({self.dim_b1}, {self.dim_b2})")
        expected = self.dim_b1 * self.dim_b2 + (1 if self.vacuum_slot else 0)
        if self.entries.shape != (expected, expected):
            raise ValueError(
                f"entries shape {self.entries.shape} does not match dimension {expected} "
                f"(dim_b1={self.dim_b1}, dim_b2={self.dim_b2}, vacuum_slot={self.vacuum_slot})"
            )
        herm = np.max(np.abs(self.entries - self.entries.conj().T))
        if herm > HERMITICITY_TOL:
            raise NumericalConsistencyError(f"matrix is not Hermitian: max deviation {herm:.3e}")
        min_diag = float(np.min(self.entries.diagonal().real))
        if min_diag < DIAGONAL_TOL:
            raise NumericalConsistencyError(f"negative diagonal entry {min_diag:.3e}")

    @cached_property
    def trace(self):
        return float(np.real(np.trace(self.entries)))

    @property
    def dim(self):
        return self.entries.shape[0]

    def normalized(self):
        """Unit-trace copy (no-op if already within tolerance)."""
        if self.trace <= 0:
            raise ValueError(f"cannot normalize matrix with trace {self.trace}")
        if abs(self.trace - 1.0) <= TRACE_TOL:
            return self
        return DensityMatrix(
            entries=self.entries / self.trace,
            dim_b1=self.dim_b1,
            dim_b2=self.dim_b2,
            vacuum_slot=self.vacuum_slot,
        )

    def biphoton_block(self):
        """The (dim_b1*dim_b2)-dimensional pair sector (vacuum row/col dropped)."""
        if self.vacuum_slot:
            return self.entries[1:, 1:]
        return self.entries

    def vacuum_population(self):
        return float(self.entries[0, 0].real) if self.vacuum_slot else 0.0

    def vacuum_coherence(self):
        """<pair, m|rho|vac> column vector (zeros if no vacuum slot)."""
        if self.vacuum_slot:
            return np.array(self.entries[1:, 0])
        return np.zeros(self.dim_b1 * self.dim_b2, dtype=complex)


@dataclass(frozen=True)
class MeasurementBinning:
    """Partition of the SFG grid into n_bins disjoint bins of q points each.

    centers: mean frequency of each bin's grid points [rad/fs];
    width: q * grid spacing [rad/fs].
    """

    n_bins: int
    points_per_bin: int
    centers: np.ndarray
    width: float
    grid_count: int
    grid_spacing: float
    grid_start: float

    def __post_init__(self):
        if self.n_bins < 1 or self.points_per_bin < 1:
            raise ConfigurationError(
                f"bin counts must be positive, got n_bins={self.n_bins}, q={self.points_per_bin}"
            )
        if self.n_bins * self.points_per_bin != self.grid_count:
            raise ConfigurationError(
                f"bins must tile the SFG grid exactly: {self.n_bins} x {self.points_per_bin} "
                f"!= {self.grid_count} grid points"
            )
        if len(self.centers) != self.n_bins:
            raise ConfigurationError("one center per bin required")
        if not np.isclose(self.width, self.points_per_bin * self.grid_spacing, rtol=1e-12):
            raise ConfigurationError("bin width must equal points_per_bin * grid spacing")

    @classmethod
    def from_grid(cls, grid, n_bins, points_per_bin):
        if n_bins * points_per_bin != grid.count:
            raise ConfigurationError(
                f"cannot split {grid.count} SFG points into {n_bins} bins of {points_per_bin}"
            )
        values = grid.values
        centers = values.reshape(n_bins, points_per_bin).mean(axis=1)
        return cls(
            n_bins=n_bins,
            points_per_bin=points_per_bin,
            centers=centers,
            width=points_per_bin * grid.spacing,
            grid_count=grid.count,
            grid_spacing=grid.spacing,
            grid_start=grid.start,
        )

    def slice_indices(self, n):
        if not 0 <= n < self.n_bins:
            raise ConfigurationError(f"bin index {n} outside 0..{self.n_bins - 1}")
        lo = n * self.points_per_bin
        return range(lo, lo + self.points_per_bin)

    def refined(self):
        """Split every bin in two (finer spectrometer); q must be even."""
        if self.points_per_bin % 2:
            raise ConfigurationError(
                f"cannot halve bins with odd points_per_bin={self.points_per_bin}"
            )
        values = self.grid_start + self.grid_spacing * np.arange(self.grid_count)
        q = self.points_per_bin // 2
        centers = values.reshape(2 * self.n_bins, q).mean(axis=1)
        return MeasurementBinning(
            n_bins=2 * self.n_bins,
            points_per_bin=q,
            centers=centers,
            width=q * self.grid_spacing,
            grid_count=self.grid_count,
            grid_spacing=self.grid_spacing,
            grid_start=self.grid_start,
        )

    def matches_grid(self, grid):
        return (
            self.grid_count == grid.count
            and np.isclose(self.grid_spacing, grid.spacing, rtol=1e-12)
            and np.isclose(self.grid_start, grid.start, rtol=0, atol=1e-9)
        )


@dataclass(frozen=True)
class BinMetrics:
    """Per-herald-outcome summary for one measurement bin."""

    center: float
    probability: float
    purity: float
    negativity: float
    rank_b1: int = 0
    rank_b2: int = 0
    compression_residual: float = 0.0


def _check_binning(psi, bins):
    if not bins.matches_grid(psi.grid_sfg):
        raise ConfigurationError(
            "measurement binning does not match the SFG grid of the three-frequency amplitude"
        )


def _grid_measure(psi):
    return TWO_PI**3 * psi.grid_b1.spacing * psi.grid_b2.spacing * psi.grid_sfg.spacing


def herald_spectrum(psi, bins):
    """Probabilities p_n of each SFG measurement outcome.

    p_n = (2 pi)^3 dw_b1 dw_b2 dw_SFG * sum over the bin's slices of
    |psi|^2; the bins partition the grid sum, so sum_n p_n equals the
    total SFG success probability exactly.
    """
    _check_binning(psi, bins)
    meas = _grid_measure(psi)
    power = np.abs(psi.amplitude) ** 2
    per_slice = power.sum(axis=(0, 1))
    return meas * per_slice.reshape(bins.n_bins, bins.points_per_bin).sum(axis=1)


def conditional_density_matrix(psi, bins, n, max_elements=DEFAULT_MAX_ELEMENTS):
    """Materialized biphoton state heralded by SFG bin n.

    Incoherent, grid-measure-weighted sum of the pure projections of the
    bin's Q amplitude slices, normalized to unit trace.  Guarded by a
    memory budget: production-size grids should use bin_metrics instead,
    which never builds the full matrix.
    """
    _check_binning(psi, bins)
    n1, n2 = psi.grid_b1.count, psi.grid_b2.count
    elements = (n1 * n2) ** 2
    if elements > max_elements:
        raise MemoryBudgetError(
            f"conditional density matrix would contain {elements} elements "
            f"({n1 * n2} x {n1 * n2}); raise max_elements or use bin_metrics"
        )
    meas = _grid_measure(psi)
    dim = n1 * n2
    entries = np.zeros((dim, dim), dtype=complex)
    total = 0.0
    for l in bins.slice_indices(n):
        v = psi.amplitude[:, :, l].reshape(-1)
        entries += meas * np.outer(v, v.conj())
        total += meas * float(np.vdot(v, v).real)
    if total <= 0:
        raise HeraldImpossibleError(f"herald bin {n} has zero probability")
    entries /= total
    entries = 0.5 * (entries + entries.conj().T)
    return DensityMatrix(entries=entries, dim_b1=n1, dim_b2=n2)


def reduced_density_matrix(psi, max_elements=DEFAULT_MAX_ELEMENTS):
    """Materialized biphoton state for frequency non-resolving heralding.

    Equivalent to the p-weighted mixture of all Q = 1 conditional states
    (trace over the full SFG grid), normalized.
    """
    n1, n2 = psi.grid_b1.count, psi.grid_b2.count
    elements = (n1 * n2) ** 2
    if elements > max_elements:
        raise MemoryBudgetError(
            f"reduced density matrix would contain {elements} elements "
            f"({n1 * n2} x {n1 * n2}); raise max_elements or use unresolved_metrics"
        )
    meas = _grid_measure(psi)
    flat = psi.amplitude.reshape(n1 * n2, psi.grid_sfg.count)
    entries = meas * (flat @ flat.conj().T)
    total = float(np.real(np.trace(entries)))
    if total <= 0:
        raise HeraldImpossibleError("three-frequency amplitude has zero total probability")
    entries /= total
    entries = 0.5 * (entries + entries.conj().T)
    return DensityMatrix(entries=entries, dim_b1=n1, dim_b2=n2)


def purity(rho):
    """Tr(rho^2) of a normalized density matrix.

    For Hermitian rho this is the squared Frobenius norm, so no
    diagonalization is needed.
    """
    if abs(rho.trace - 1.0) > 1e-8:
        raise ValueError(f"purity requires a normalized matrix, trace = {rho.trace!r}")
    return float(np.vdot(rho.entries, rho.entries).real)


def partial_transpose(rho):
    """Transpose over the first bystander: (j,k),(j',k') -> (j',k),(j,k').

    For a vacuum-slotted matrix the operation is closed on the tracked
    {vacuum} + pair sector only when the vacuum-pair coherences vanish
    (the transpose moves coherences into single-photon levels that are
    not tracked); in that case the pair block is transposed and the
    vacuum entry kept.  Coherent vacuum-slotted matrices are handled
    spectrally inside negativity().
    """
    n1, n2 = rho.dim_b1, rho.dim_b2
    if rho.vacuum_slot:
        coh = rho.vacuum_coherence()
        if np.max(np.abs(coh)) > 1e-14:
            raise ValueError(
                "partial transpose of a vacuum-slotted matrix with vacuum-pair "
                "coherences leaves the tracked sector; use negativity() directly"
            )
        out = np.array(rho.entries)
        block = out[1:, 1:].reshape(n1, n2, n1, n2)
        out[1:, 1:] = np.transpose(block, (2, 1, 0, 3)).reshape(n1 * n2, n1 * n2)
        return DensityMatrix(entries=out, dim_b1=n1, dim_b2=n2, vacuum_slot=True)
    block = rho.entries.reshape(n1, n2, n1, n2)
    out = np.ascontiguousarray(np.transpose(block, (2, 1, 0, 3)).reshape(n1 * n2, n1 * n2))
    return DensityMatrix(entries=out, dim_b1=n1, dim_b2=n2)


def _pt_spectrum(rho):
    """Eigenvalues of the partial transpose over the first bystander.

    Vacuum-slotted matrices are diagonalized blockwise in the full
    composite space {vac_1, j} x {vac_2, k}: the pair block transposes
    within its sector, the vacuum level is invariant, and the vacuum-pair
    coherence c_(jk) moves into the single-photon sector where it
    contributes an eigenvalue pair +-s for every singular value s of
    c reshaped to (dim_b1, dim_b2).  This is exact and avoids forming
    the (dim_b1+1)(dim_b2+1) matrix.
    """
    n1, n2 = rho.dim_b1, rho.dim_b2
    if rho.vacuum_slot:
        block = rho.biphoton_block().reshape(n1, n2, n1, n2)
        pt = np.transpose(block, (2, 1, 0, 3)).reshape(n1 * n2, n1 * n2)
        eigs = [np.linalg.eigvalsh(pt), np.array([rho.vacuum_population()])]
        coh = rho.vacuum_coherence()
        if np.max(np.abs(coh)) > 0:
            sv = np.linalg.svd(coh.reshape(n1, n2), compute_uv=False)
            eigs.append(sv)
            eigs.append(-sv)
        return np.concatenate(eigs)
    return np.linalg.eigvalsh(partial_transpose(rho).entries)


def negativity(rho):
    """Entanglement negativity: magnitude sum of negative PT eigenvalues.

    Both the eigenvalue-sum form and the trace-norm form
    (||rho^PT||_1 - Tr rho)/2 are evaluated; they must agree to 1e-10 or
    the call raises, so a numerically broken spectrum can never pass as
    an entanglement value.  Eigenvalues above -1e-12 are treated as
    numerical zeros.  Vacuum-slotted states are handled exactly via the
    blockwise spectrum (see _pt_spectrum).
    """
    spectrum = _pt_spectrum(rho)
    negative = spectrum[spectrum <= -EIGENVALUE_CLIP]
    neg_sum = float(-negative.sum()) if negative.size else 0.0
    trace_norm = float(np.abs(spectrum).sum())
    trace = float(spectrum.sum())
    neg_tn = 0.5 * (trace_norm - trace)
    if abs(neg_sum - neg_tn) > ROUTE_AGREEMENT_TOL:
        raise NumericalConsistencyError(
            f"negativity routes disagree: eigenvalue sum {neg_sum!r} vs "
            f"trace-norm form {neg_tn!r}"
        )
    return neg_sum


def weighted_average(values, weights):
    """Herald-probability-weighted mean of per-bin figures of merit."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if values.shape != weights.shape:
        raise ValueError(f"length mismatch: {values.shape} values vs {weights.shape} weights")
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    total = weights.sum()
    if total <= 0:
        raise ValueError("weights must not all be zero")
    return float(values @ weights / total)


# ---------------------------------------------------------------------------
# low-rank herald-bin metrics (production path)
# ---------------------------------------------------------------------------


def _joint_rank_bases(slices, rtol, cap=None):
    """Orthonormal bases of the joint column and row spaces of the slices.

    Returns (U_L, U_R) such that each slice M is well approximated by
    U_L (U_L^H M U_R) U_R^H once the rank cutoff keeps the significant
    singular directions of the stacked slices.
    """
    stacked_cols = np.hstack(slices)
    u_l, s_l, _ = np.linalg.svd(stacked_cols, full_matrices=False)
    stacked_rows = np.vstack(slices)
    _, s_r, v_r = np.linalg.svd(stacked_rows, full_matrices=False)
    r_l = int((s_l > rtol * s_l[0]).sum()) if s_l.size else 0
    r_r = int((s_r > rtol * s_r[0]).sum()) if s_r.size else 0
    if cap is not None:
        r_l, r_r = min(r_l, cap), min(r_r, cap)
    if r_l == 0 or r_r == 0:
        raise HeraldImpossibleError("amplitude slices are identically zero")
    return u_l[:, :r_l], v_r[:r_r, :].conj().T


def _compressed_state(slices, slice_weight, rtol, cap=None):
    """Rotate a Q-slice mixture into its joint-support bases.

    The returned DensityMatrix has subsystem dimensions (r_L, r_R) and
    represents the same state in the local product basis formed from
    the joint-support vectors, which preserves the trace, the purity,
    and the partial-transpose spectrum.  The residual is the largest
    relative Frobenius-norm error of any rank-truncated slice; it is
    exactly zero when the bases span every slice.
    """
    u_l, u_r = _joint_rank_bases(slices, rtol, cap)
    r_l, r_r = u_l.shape[1], u_r.shape[1]
    resid = 0.0
    cores = []
    for m in slices:
        core = u_l.conj().T @ m @ u_r
        cores.append(core)
        norm_full = float(np.vdot(m, m).real)
        norm_kept = float(np.vdot(core, core).real)
        if norm_full > 0:
            resid = max(resid, np.sqrt(max(0.0, 1.0 - norm_kept / norm_full)))
    total = slice_weight * sum(float(np.vdot(a, a).real) for a in cores)
    if total <= 0:
        raise HeraldImpossibleError("compressed state carries zero probability")
    dim = r_l * r_r
    entries = np.zeros((dim, dim), dtype=complex)
    for a in cores:
        v = a.reshape(-1)
        entries += (slice_weight / total) * np.outer(v, v.conj())
    entries = 0.5 * (entries + entries.conj().T)
    rho_c = DensityMatrix(entries=entries, dim_b1=r_l, dim_b2=r_r)
    return rho_c, resid


def _mixture_metrics(slices, slice_weight, rank_rtol, rank_cap=None):
    """(probability, purity, negativity, ranks, residual) of a slice mixture.

    Purity comes from the Q x Q Gram matrix of the slices (exact, no
    compression); negativity from the compressed representation.
    """
    vecs = np.stack([m.reshape(-1) for m in slices])
    gram = slice_weight * (vecs @ vecs.conj().T)
    prob = float(np.real(np.trace(gram)))
    if prob <= 0:
        raise HeraldImpossibleError("slice mixture has zero probability")
    pur = float(np.real(np.sum(np.abs(gram) ** 2)) / prob**2)
    rho_c, resid = _compressed_state(slices, slice_weight, rank_rtol, rank_cap)
    neg = negativity(rho_c)
    return prob, pur, neg, rho_c.dim_b1, rho_c.dim_b2, resid


def bin_metrics(psi, bins, n, rank_rtol=DEFAULT_RANK_RTOL, rank_cap=None):
    """Herald probability, purity, and negativity for measurement bin n.

    Never materializes the (N1 N2)^2 conditional matrix; cost is set by
    the physical Schmidt content of the bin, not the grid size.
    """
    _check_binning(psi, bins)
    meas = _grid_measure(psi)
    slices = [np.ascontiguousarray(psi.amplitude[:, :, l]) for l in bins.slice_indices(n)]
    prob, pur, neg, r1, r2, resid = _mixture_metrics(slices, meas, rank_rtol, rank_cap)
    return BinMetrics(
        center=float(bins.centers[n]),
        probability=prob,
        purity=pur,
        negativity=neg,
        rank_b1=r1,
        rank_b2=r2,
        compression_residual=resid,
    )


def unresolved_metrics(psi, rank_rtol=DEFAULT_RANK_RTOL, rank_cap=None):
    """Purity and negativity for frequency non-resolving heralding.

    Same machinery as bin_metrics with all SFG slices in one mixture.
    """
    meas = _grid_measure(psi)
    slices = [np.ascontiguousarray(psi.amplitude[:, :, l]) for l in range(psi.grid_sfg.count)]
    prob, pur, neg, r1, r2, resid = _mixture_metrics(slices, meas, rank_rtol, rank_cap)
    return BinMetrics(
        center=float(psi.grid_sfg.center),
        probability=prob,
        purity=pur,
        negativity=neg,
        rank_b1=r1,
        rank_b2=r2,
        compression_residual=resid,
    )


def streaming_bin_metrics(slice_factory, grids, bins, rank_rtol=DEFAULT_RANK_RTOL, rank_cap=None):
    """Per-bin metrics from a re-iterable slice producer.

    slice_factory() must return an iterator over (N1, N2) amplitude
    slices in SFG-grid order; only one bin's Q slices are buffered at a
    time, so three-frequency amplitudes larger than the memory budget
    can be analyzed.  Returns a list of BinMetrics in bin order.
    """
    grid_b1, grid_b2, grid_sfg = grids
    if not bins.matches_grid(grid_sfg):
        raise ConfigurationError("measurement binning does not match the SFG grid")
    meas = TWO_PI**3 * grid_b1.spacing * grid_b2.spacing * grid_sfg.spacing
    results = []
    buffer = []
    n = 0
    for l, amp in enumerate(slice_factory()):
        if amp.shape != (grid_b1.count, grid_b2.count):
            raise ConfigurationError(
                f"slice {l} has shape {amp.shape}, expected ({grid_b1.count}, {grid_b2.count})"
            )
        buffer.append(np.ascontiguousarray(amp))
        if len(buffer) == bins.points_per_bin:
            prob, pur, neg, r1, r2, resid = _mixture_metrics(buffer, meas, rank_rtol, rank_cap)
            results.append(
                BinMetrics(
                    center=float(bins.centers[n]),
                    probability=prob,
                    purity=pur,
                    negativity=neg,
                    rank_b1=r1,
                    rank_b2=r2,
                    compression_residual=resid,
                )
            )
            buffer = []
            n += 1
    if buffer or n != bins.n_bins:
        raise ConfigurationError(
            f"slice producer yielded {n * bins.points_per_bin + len(buffer)} slices, "
            f"expected {bins.n_bins * bins.points_per_bin}"
        )
    return results


# ---------------------------------------------------------------------------
# few-mode reference states
# ---------------------------------------------------------------------------


def toy_state_negativity(n_modes, eta, coherent=False):
    """Negativity of the N-mode anticorrelated pair state mixed with vacuum.

    The pair amplitude is maximally entangled across N frequency modes
    per arm (amplitude 1/sqrt(N) on the anti-diagonal j + k = N + 1).
    With probability eta the pair is present, else vacuum; the coherent
    flag keeps the vacuum-pair coherences of the pure superposition.
    The incoherent variant evaluates to (N - 1) eta / 2.
    """
    if n_modes < 2:
        raise ValueError(f"need at least 2 modes, got {n_modes}")
    if not 0 <= eta <= 1:
        raise ValueError(f"eta must be in [0, 1], got {eta}")
    amp = np.zeros((n_modes, n_modes), dtype=complex)
    for j in range(n_modes):
        amp[j, n_modes - 1 - j] = 1.0 / np.sqrt(n_modes)
    psi = amp.reshape(-1)
    dim = n_modes * n_modes + 1
    entries = np.zeros((dim, dim), dtype=complex)
    entries[0, 0] = 1.0 - eta
    entries[1:, 1:] = eta * np.outer(psi, psi.conj())
    if coherent:
        coh = np.sqrt(eta * (1.0 - eta)) * psi
        entries[1:, 0] = coh
        entries[0, 1:] = coh.conj()
    rho = DensityMatrix(entries=entries, dim_b1=n_modes, dim_b2=n_modes, vacuum_slot=True)
    return negativity(rho)
