//! Dense multimode Fock registers: pure states and density matrices over
//! truncated Fock spaces, addressed by mode label.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::linalg::{self, CMatrix, ZERO};
use crate::{math, Error, Result, C64};

/// Default cap on the number of complex amplitudes a single dense tensor
/// may hold (1 GiB of `Complex64`).
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TimeBin {
    Early,
    Late,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Spatial {
    Named(&'static str),
    /// Scratch modes (loss ancillas, merged Schmidt indices).
    Ancilla(u16),
}

/// A spatial mode plus an optional time bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub spatial: Spatial,
    pub bin: TimeBin,
}

impl ModeLabel {
    pub const fn new(name: &'static str, bin: TimeBin) -> Self {
        Self { spatial: Spatial::Named(name), bin }
    }

    pub const fn plain(name: &'static str) -> Self {
        Self::new(name, TimeBin::None)
    }

    pub const fn early(name: &'static str) -> Self {
        Self::new(name, TimeBin::Early)
    }

    pub const fn late(name: &'static str) -> Self {
        Self::new(name, TimeBin::Late)
    }

    pub const fn ancilla(index: u16) -> Self {
        Self { spatial: Spatial::Ancilla(index), bin: TimeBin::None }
    }

    pub const fn in_bin(self, bin: TimeBin) -> Self {
        Self { spatial: self.spatial, bin }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.spatial {
            Spatial::Named(name) => write!(f, "{name}")?,
            Spatial::Ancilla(i) => write!(f, "#{i}")?,
        }
        match self.bin {
            TimeBin::Early => write!(f, "_e"),
            TimeBin::Late => write!(f, "_l"),
            TimeBin::None => Ok(()),
        }
    }
}

/// Cutoff selection for modes carrying coherent or squeezed light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub base_cutoff: usize,
    /// Largest amplitude mass allowed beyond a cutoff.
    pub eps: f64,
    /// Minimum cutoff for detection modes.
    pub detector_floor: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { base_cutoff: 4, eps: 1e-10, detector_floor: 6 }
    }
}

impl TruncationPolicy {
    /// `ceil(|β|² + 6|β|) + base_cutoff`.
    pub fn amplitude_rule(&self, beta_abs: f64) -> usize {
        math::ceil(beta_abs * beta_abs + 6.0 * beta_abs) as usize + self.base_cutoff
    }

    /// The amplitude rule, raised until the Poisson tail drops below `eps`.
    pub fn coherent_cutoff(&self, beta_abs: f64) -> usize {
        let mean = beta_abs * beta_abs;
        let mut n = self.amplitude_rule(beta_abs);
        while poisson_tail(mean, n) > self.eps {
            n += 1;
        }
        n
    }

    /// Cutoff for a mode holding displaced light of amplitude `beta_abs` on
    /// top of at most `photons` extra quanta.
    pub fn displaced_cutoff(&self, beta_abs: f64, photons: usize) -> usize {
        self.coherent_cutoff(beta_abs) + photons
    }

    pub fn detector_cutoff(&self, beta_abs: f64, photons: usize) -> usize {
        self.displaced_cutoff(beta_abs, photons).max(self.detector_floor)
    }

    /// Smallest even cutoff whose squeezed-vacuum tail mass is below `eps`.
    pub fn squeezed_cutoff(&self, zeta: f64) -> usize {
        let amps = squeezed_amplitudes(zeta, 600);
        let mut tail: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
        for (n, c) in amps.iter().enumerate() {
            tail -= c.norm_sqr();
            if n % 2 == 0 && n >= self.base_cutoff && tail <= self.eps {
                return n;
            }
        }
        amps.len() - 1
    }
}

/// `Σ_{k>n} e^{-m} m^k / k!`, summed directly so small tails keep full
/// relative precision.
pub fn poisson_tail(mean: f64, n: usize) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let k0 = n + 1;
    let ln_first = -mean + k0 as f64 * math::ln(mean) - math::ln_factorial(k0);
    let mut term = math::exp(ln_first);
    let mut sum = 0.0;
    let mut k = k0;
    loop {
        sum += term;
        k += 1;
        term *= mean / k as f64;
        if term <= sum * 1e-18 || k > k0 + 4000 {
            break;
        }
        if term == 0.0 && sum == 0.0 && (k as f64) > mean {
            break;
        }
    }
    sum
}

/// Coherent amplitudes `e^{-|β|²/2} β^k / √k!` for `k ≤ cutoff`, without
/// any tail check.
pub fn coherent_amplitudes(beta: C64, cutoff: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(cutoff + 1);
    let mut c = C64::new(math::exp(-0.5 * beta.norm_sqr()), 0.0);
    out.push(c);
    for k in 1..=cutoff {
        c = c * beta / math::sqrt(k as f64);
        out.push(c);
    }
    out
}

/// Coherent state truncated at `cutoff`. Fails with the norm deficit when
/// the neglected mass exceeds `tol`.
pub fn coherent_state(beta: C64, cutoff: usize, tol: f64) -> Result<Vec<C64>> {
    let deficit = poisson_tail(beta.norm_sqr(), cutoff);
    if deficit > tol {
        return Err(Error::Truncation { deficit, tolerance: tol });
    }
    Ok(coherent_amplitudes(beta, cutoff))
}

/// Amplitudes of `S(ζ)|0⟩` with `S(ζ) = exp(½(ζ* a² − ζ a†²))`, real `ζ`.
pub(crate) fn squeezed_amplitudes(zeta: f64, cutoff: usize) -> Vec<C64> {
    let th = math::tanh(zeta);
    let mut out = vec![ZERO; cutoff + 1];
    let mut c = 1.0 / math::sqrt(math::cosh(zeta));
    out[0] = C64::new(c, 0.0);
    let mut n = 2;
    while n <= cutoff {
        // c_{n} = c_{n-2} · (−tanh ζ) · √((n−1)/n)
        c *= -th * math::sqrt((n - 1) as f64 / n as f64);
        out[n] = C64::new(c, 0.0);
        n += 2;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    Pure,
    Mixed,
}

/// Dense state on an ordered list of labelled, truncated modes.
///
/// Pure data is row-major with the first mode slowest. Mixed data stores
/// `ρ[row][col]` at `row * dim + col`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockRegister {
    modes: Vec<ModeLabel>,
    cutoffs: Vec<usize>,
    kind: StateKind,
    data: Vec<C64>,
}

fn check_unique(modes: &[ModeLabel]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::DuplicateMode(*m));
        }
    }
    Ok(())
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Flat offsets of every multi-index over `positions`, enumerated row-major
/// in the order given.
fn sub_offsets(dims: &[usize], strides: &[usize], positions: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &p in positions {
        let mut next = Vec::with_capacity(out.len() * dims[p]);
        for &o in &out {
            for i in 0..dims[p] {
                next.push(o + i * strides[p]);
            }
        }
        out = next;
    }
    out
}

type SparseRows = Vec<Vec<(usize, C64)>>;

fn sparse_rows(op: &CMatrix) -> SparseRows {
    (0..op.nrows())
        .map(|i| {
            (0..op.ncols())
                .filter_map(|j| {
                    let v = op[(i, j)];
                    (v != ZERO).then_some((j, v))
                })
                .collect()
        })
        .collect()
}

/// Contract `op` (rows over `out_dims`, columns over the current dims of
/// `positions`) into a row-major tensor.
fn contract(
    data: &[C64],
    dims: &[usize],
    positions: &[usize],
    rows: &SparseRows,
    out_dims: &[usize],
) -> (Vec<C64>, Vec<usize>) {
    let old_strides = strides(dims);
    let mut new_dims = dims.to_vec();
    for (&p, &d) in positions.iter().zip(out_dims) {
        new_dims[p] = d;
    }
    let new_strides = strides(&new_dims);
    let rest: Vec<usize> = (0..dims.len()).filter(|i| !positions.contains(i)).collect();
    let t_in = sub_offsets(dims, &old_strides, positions);
    let t_out = sub_offsets(&new_dims, &new_strides, positions);
    let b_old = sub_offsets(dims, &old_strides, &rest);
    let b_new = sub_offsets(&new_dims, &new_strides, &rest);
    let total: usize = new_dims.iter().product();
    let mut out = vec![ZERO; total];
    let mut gathered = vec![ZERO; t_in.len()];
    for (&bo, &bn) in b_old.iter().zip(&b_new) {
        for (g, &t) in gathered.iter_mut().zip(&t_in) {
            *g = data[bo + t];
        }
        for (row, &t) in rows.iter().zip(&t_out) {
            let mut it = row.iter();
            if let Some(&(j, v)) = it.next() {
                let mut acc = v * gathered[j];
                for &(j, v) in it {
                    acc += v * gathered[j];
                }
                out[bn + t] = acc;
            }
        }
    }
    (out, new_dims)
}

impl FockRegister {
    fn dims(&self) -> Vec<usize> {
        self.cutoffs.iter().map(|c| c + 1).collect()
    }

    /// Product of all mode dimensions.
    pub fn dim(&self) -> usize {
        self.cutoffs.iter().map(|c| c + 1).product()
    }

    pub fn from_pure(modes: Vec<ModeLabel>, cutoffs: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        Self::build(modes, cutoffs, StateKind::Pure, amplitudes)
    }

    /// Density matrix given row-major (`row * dim + col`).
    pub fn from_density(modes: Vec<ModeLabel>, cutoffs: Vec<usize>, entries: Vec<C64>) -> Result<Self> {
        Self::build(modes, cutoffs, StateKind::Mixed, entries)
    }

    pub fn from_matrix(modes: Vec<ModeLabel>, cutoffs: Vec<usize>, m: &CMatrix) -> Result<Self> {
        let dim: usize = cutoffs.iter().map(|c| c + 1).product();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: m.nrows() });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(m[(i, j)]);
            }
        }
        Self::from_density(modes, cutoffs, entries)
    }

    fn build(modes: Vec<ModeLabel>, cutoffs: Vec<usize>, kind: StateKind, data: Vec<C64>) -> Result<Self> {
        if modes.len() != cutoffs.len() {
            return Err(Error::DimensionMismatch { expected: modes.len(), found: cutoffs.len() });
        }
        check_unique(&modes)?;
        let dim: usize = cutoffs.iter().map(|c| c + 1).product();
        let expected = match kind {
            StateKind::Pure => dim,
            StateKind::Mixed => dim * dim,
        };
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: data.len() });
        }
        Ok(Self { modes, cutoffs, kind, data })
    }

    /// Single-mode pure state from its Fock amplitudes.
    pub fn single_mode(mode: ModeLabel, amplitudes: Vec<C64>) -> Self {
        let cutoff = amplitudes.len().saturating_sub(1);
        Self { modes: vec![mode], cutoffs: vec![cutoff], kind: StateKind::Pure, data: amplitudes }
    }

    /// Product of Fock number states `|n⟩` given as `(mode, cutoff, n)`.
    pub fn fock_state(spec: &[(ModeLabel, usize, usize)]) -> Result<Self> {
        let modes: Vec<ModeLabel> = spec.iter().map(|s| s.0).collect();
        let cutoffs: Vec<usize> = spec.iter().map(|s| s.1).collect();
        let dims: Vec<usize> = cutoffs.iter().map(|c| c + 1).collect();
        let st = strides(&dims);
        let mut index = 0;
        for (i, &(m, c, n)) in spec.iter().enumerate() {
            if n > c {
                return Err(Error::OutOfRange { name: "photon number", value: n as f64 });
            }
            let _ = m;
            index += n * st[i];
        }
        let mut data = vec![ZERO; dims.iter().product()];
        data[index] = linalg::ONE;
        Self::from_pure(modes, cutoffs, data)
    }

    pub fn vacuum(spec: &[(ModeLabel, usize)]) -> Result<Self> {
        let full: Vec<(ModeLabel, usize, usize)> = spec.iter().map(|&(m, c)| (m, c, 0)).collect();
        Self::fock_state(&full)
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn position(&self, mode: ModeLabel) -> Result<usize> {
        self.modes.iter().position(|m| *m == mode).ok_or(Error::UnknownMode(mode))
    }

    pub fn cutoff(&self, mode: ModeLabel) -> Result<usize> {
        Ok(self.cutoffs[self.position(mode)?])
    }

    fn positions(&self, targets: &[ModeLabel]) -> Result<Vec<usize>> {
        check_unique(targets)?;
        targets.iter().map(|&m| self.position(m)).collect()
    }

    fn flat_index(&self, occupation: &[usize]) -> Result<usize> {
        if occupation.len() != self.modes.len() {
            return Err(Error::DimensionMismatch { expected: self.modes.len(), found: occupation.len() });
        }
        let st = strides(&self.dims());
        let mut idx = 0;
        for (i, (&n, &c)) in occupation.iter().zip(&self.cutoffs).enumerate() {
            if n > c {
                return Err(Error::OutOfRange { name: "photon number", value: n as f64 });
            }
            idx += n * st[i];
        }
        Ok(idx)
    }

    /// Amplitude of a pure register at the given occupation numbers
    /// (register order).
    pub fn amplitude(&self, occupation: &[usize]) -> Result<C64> {
        self.expect(StateKind::Pure)?;
        Ok(self.data[self.flat_index(occupation)?])
    }

    /// Density-matrix entry `⟨row|ρ|col⟩`.
    pub fn entry(&self, row: &[usize], col: &[usize]) -> Result<C64> {
        self.expect(StateKind::Mixed)?;
        let d = self.dim();
        Ok(self.data[self.flat_index(row)? * d + self.flat_index(col)?])
    }

    fn expect(&self, kind: StateKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected: match kind {
                    StateKind::Pure => "pure",
                    StateKind::Mixed => "mixed",
                },
            })
        }
    }

    /// `‖ψ‖²` for pure registers, `Tr ρ` for mixed ones.
    pub fn norm_sqr(&self) -> f64 {
        match self.kind {
            StateKind::Pure => self.data.iter().map(|c| c.norm_sqr()).sum(),
            StateKind::Mixed => self.trace().re,
        }
    }

    pub fn trace(&self) -> C64 {
        match self.kind {
            StateKind::Pure => C64::new(self.norm_sqr(), 0.0),
            StateKind::Mixed => {
                let d = self.dim();
                (0..d).map(|i| self.data[i * d + i]).sum()
            }
        }
    }

    pub fn scaled(mut self, factor: C64) -> Self {
        for c in &mut self.data {
            *c *= factor;
        }
        self
    }

    /// Rescale to unit norm (pure) or unit trace (mixed).
    pub fn normalized(self) -> Result<Self> {
        let n = self.norm_sqr();
        if !(n > 0.0) {
            return Err(Error::DegenerateOutcome { probability: n });
        }
        let f = match self.kind {
            StateKind::Pure => 1.0 / math::sqrt(n),
            StateKind::Mixed => 1.0 / n,
        };
        Ok(self.scaled(C64::new(f, 0.0)))
    }

    /// `|ψ⟩⟨ψ|`; mixed registers are returned unchanged.
    pub fn to_mixed(&self) -> Self {
        match self.kind {
            StateKind::Mixed => self.clone(),
            StateKind::Pure => {
                let d = self.data.len();
                let mut data = Vec::with_capacity(d * d);
                for a in &self.data {
                    for b in &self.data {
                        data.push(a * b.conj());
                    }
                }
                Self { modes: self.modes.clone(), cutoffs: self.cutoffs.clone(), kind: StateKind::Mixed, data }
            }
        }
    }

    pub fn as_matrix(&self) -> Result<CMatrix> {
        self.expect(StateKind::Mixed)?;
        let d = self.dim();
        Ok(CMatrix::from_row_slice(d, d, &self.data))
    }

    /// Apply `op` to `targets`. `op` is square over the product of the
    /// target dimensions (in the order given); mixed registers evolve as
    /// `op ρ op^†`.
    pub fn apply_operator(&self, op: &CMatrix, targets: &[ModeLabel]) -> Result<Self> {
        let pos = self.positions(targets)?;
        let cut: Vec<usize> = pos.iter().map(|&p| self.cutoffs[p]).collect();
        self.apply_map(op, targets, &cut)
    }

    /// Apply a possibly rectangular map whose rows range over the target
    /// modes with `out_cutoffs`. The targets keep their positions and take
    /// the new cutoffs.
    pub fn apply_map(&self, op: &CMatrix, targets: &[ModeLabel], out_cutoffs: &[usize]) -> Result<Self> {
        let pos = self.positions(targets)?;
        if out_cutoffs.len() != pos.len() {
            return Err(Error::DimensionMismatch { expected: pos.len(), found: out_cutoffs.len() });
        }
        let in_dim: usize = pos.iter().map(|&p| self.cutoffs[p] + 1).product();
        let out_dims: Vec<usize> = out_cutoffs.iter().map(|c| c + 1).collect();
        let out_dim: usize = out_dims.iter().product();
        if op.ncols() != in_dim {
            return Err(Error::DimensionMismatch { expected: in_dim, found: op.ncols() });
        }
        if op.nrows() != out_dim {
            return Err(Error::DimensionMismatch { expected: out_dim, found: op.nrows() });
        }
        let rows = sparse_rows(op);
        let dims = self.dims();
        let data = match self.kind {
            StateKind::Pure => contract(&self.data, &dims, &pos, &rows, &out_dims).0,
            StateKind::Mixed => {
                let m = dims.len();
                let mut dims2 = dims.clone();
                dims2.extend_from_slice(&dims);
                let (half, dims2) = contract(&self.data, &dims2, &pos, &rows, &out_dims);
                let conj_rows: SparseRows =
                    rows.iter().map(|r| r.iter().map(|&(j, v)| (j, v.conj())).collect()).collect();
                let bra: Vec<usize> = pos.iter().map(|p| p + m).collect();
                contract(&half, &dims2, &bra, &conj_rows, &out_dims).0
            }
        };
        let mut cutoffs = self.cutoffs.clone();
        for (&p, &c) in pos.iter().zip(out_cutoffs) {
            cutoffs[p] = c;
        }
        Ok(Self { modes: self.modes.clone(), cutoffs, kind: self.kind, data })
    }

    /// Apply `op` on the ket side only (`op ρ` for mixed registers).
    pub fn apply_left(&self, op: &CMatrix, targets: &[ModeLabel]) -> Result<Self> {
        if self.kind == StateKind::Pure {
            return self.apply_operator(op, targets);
        }
        let pos = self.positions(targets)?;
        let in_dim: usize = pos.iter().map(|&p| self.cutoffs[p] + 1).product();
        if op.ncols() != in_dim || op.nrows() != in_dim {
            return Err(Error::DimensionMismatch { expected: in_dim, found: op.ncols() });
        }
        let dims = self.dims();
        let out_dims: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
        let mut dims2 = dims.clone();
        dims2.extend_from_slice(&dims);
        let (data, _) = contract(&self.data, &dims2, &pos, &sparse_rows(op), &out_dims);
        Ok(Self { modes: self.modes.clone(), cutoffs: self.cutoffs.clone(), kind: self.kind, data })
    }

    /// Change one mode's cutoff, padding with zeros or discarding levels.
    pub fn with_cutoff(&self, mode: ModeLabel, cutoff: usize) -> Result<Self> {
        let old = self.cutoff(mode)?;
        let mut id = CMatrix::zeros(cutoff + 1, old + 1);
        for i in 0..=old.min(cutoff) {
            id[(i, i)] = linalg::ONE;
        }
        self.apply_map(&id, &[mode], &[cutoff])
    }

    pub fn relabel(&mut self, from: ModeLabel, to: ModeLabel) -> Result<()> {
        let p = self.position(from)?;
        if from != to && self.modes.contains(&to) {
            return Err(Error::DuplicateMode(to));
        }
        self.modes[p] = to;
        Ok(())
    }

    pub fn relabeled(mut self, from: ModeLabel, to: ModeLabel) -> Result<Self> {
        self.relabel(from, to)?;
        Ok(self)
    }

    /// Reorder the modes; `order` must be a permutation of the mode list.
    pub fn permuted(&self, order: &[ModeLabel]) -> Result<Self> {
        if order.len() != self.modes.len() {
            return Err(Error::ModeMismatch);
        }
        let pos = self.positions(order)?;
        let dims = self.dims();
        let st = strides(&dims);
        let offsets = sub_offsets(&dims, &st, &pos);
        let data = match self.kind {
            StateKind::Pure => offsets.iter().map(|&o| self.data[o]).collect(),
            StateKind::Mixed => {
                let d = self.dim();
                let mut out = Vec::with_capacity(d * d);
                for &r in &offsets {
                    for &c in &offsets {
                        out.push(self.data[r * d + c]);
                    }
                }
                out
            }
        };
        Ok(Self {
            modes: order.to_vec(),
            cutoffs: pos.iter().map(|&p| self.cutoffs[p]).collect(),
            kind: self.kind,
            data,
        })
    }

    /// `self ⊗ other`. A pure factor is promoted when the other is mixed.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        check_unique(&modes)?;
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        if self.kind == StateKind::Pure && other.kind == StateKind::Pure {
            let mut data = Vec::with_capacity(self.data.len() * other.data.len());
            for a in &self.data {
                for b in &other.data {
                    data.push(a * b);
                }
            }
            return Ok(Self { modes, cutoffs, kind: StateKind::Pure, data });
        }
        let a = self.to_mixed();
        let b = other.to_mixed();
        let (da, db) = (a.dim(), b.dim());
        let d = da * db;
        let mut data = vec![ZERO; d * d];
        for ia in 0..da {
            for ib in 0..db {
                let row = (ia * db + ib) * d;
                for ja in 0..da {
                    let x = a.data[ia * da + ja];
                    if x == ZERO {
                        continue;
                    }
                    for jb in 0..db {
                        data[row + ja * db + jb] = x * b.data[ib * db + jb];
                    }
                }
            }
        }
        Ok(Self { modes, cutoffs, kind: StateKind::Mixed, data })
    }

    fn split_positions(&self, keep: &[ModeLabel]) -> Result<(Vec<usize>, Vec<usize>)> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let kp = self.positions(keep)?;
        let kept: Vec<usize> = (0..self.modes.len()).filter(|i| kp.contains(i)).collect();
        let traced: Vec<usize> = (0..self.modes.len()).filter(|i| !kp.contains(i)).collect();
        Ok((kept, traced))
    }

    fn sub_register_meta(&self, kept: &[usize]) -> (Vec<ModeLabel>, Vec<usize>) {
        (kept.iter().map(|&p| self.modes[p]).collect(), kept.iter().map(|&p| self.cutoffs[p]).collect())
    }

    /// Reduced density matrix on `keep`. Kept modes retain register order.
    pub fn partial_trace(&self, keep: &[ModeLabel]) -> Result<Self> {
        if self.kind == StateKind::Pure {
            return cross_trace(self, self, keep);
        }
        let (kept, traced) = self.split_positions(keep)?;
        let dims = self.dims();
        let st = strides(&dims);
        let ko = sub_offsets(&dims, &st, &kept);
        let to = sub_offsets(&dims, &st, &traced);
        let d = self.dim();
        let dk = ko.len();
        let mut data = vec![ZERO; dk * dk];
        for (i, &ri) in ko.iter().enumerate() {
            for (j, &cj) in ko.iter().enumerate() {
                let mut acc = ZERO;
                for &t in &to {
                    acc += self.data[(ri + t) * d + cj + t];
                }
                data[i * dk + j] = acc;
            }
        }
        let (modes, cutoffs) = self.sub_register_meta(&kept);
        Ok(Self { modes, cutoffs, kind: StateKind::Mixed, data })
    }

    /// Largest `|ρ - ρ^†|` entry (0 for pure registers).
    pub fn hermiticity_deviation(&self) -> f64 {
        match self.kind {
            StateKind::Pure => 0.0,
            StateKind::Mixed => self.as_matrix().map(|m| linalg::hermiticity_deviation(&m)).unwrap_or(0.0),
        }
    }

    /// Eigenvalues of the (symmetrised) density matrix, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigenvalues(&self.to_mixed().as_matrix()?))
    }

    /// Schmidt decomposition across `left | rest`. Terms whose squared
    /// coefficient falls below `rel_tol` times the total are dropped.
    pub fn schmidt(&self, left: &[ModeLabel], rel_tol: f64) -> Result<Vec<SchmidtTerm>> {
        self.expect(StateKind::Pure)?;
        let (_, rest_pos) = self.split_positions(left)?;
        let right: Vec<ModeLabel> = rest_pos.iter().map(|&p| self.modes[p]).collect();
        if right.is_empty() {
            return Err(Error::EmptyKeep);
        }
        let mut order = left.to_vec();
        order.extend_from_slice(&right);
        let p = self.permuted(&order)?;
        let left_cut: Vec<usize> = p.cutoffs[..left.len()].to_vec();
        let right_cut: Vec<usize> = p.cutoffs[left.len()..].to_vec();
        let dl: usize = left_cut.iter().map(|c| c + 1).product();
        let dr: usize = right_cut.iter().map(|c| c + 1).product();
        let m = CMatrix::from_row_slice(dl, dr, &p.data);
        let terms = linalg::svd_terms(&m);
        let total: f64 = terms.iter().map(|t| t.0 * t.0).sum();
        let mut out = Vec::new();
        for (s, u, r) in terms {
            if s * s <= rel_tol * total || s == 0.0 {
                continue;
            }
            out.push(SchmidtTerm {
                weight: s,
                left: Self::from_pure(left.to_vec(), left_cut.clone(), u.iter().copied().collect())?,
                right: Self::from_pure(right.clone(), right_cut.clone(), r.iter().copied().collect())?,
            });
        }
        Ok(out)
    }
}

/// One term `weight · |left⟩|right⟩` of a Schmidt decomposition, with unit
/// vectors on each side.
#[derive(Debug, Clone)]
pub struct SchmidtTerm {
    pub weight: f64,
    pub left: FockRegister,
    pub right: FockRegister,
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &FockRegister, b: &FockRegister) -> Result<C64> {
    a.expect(StateKind::Pure)?;
    b.expect(StateKind::Pure)?;
    if a.modes != b.modes || a.cutoffs != b.cutoffs {
        return Err(Error::ModeMismatch);
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// `Tr_rest |a⟩⟨b|` on the `keep` modes, for two pure registers with the
/// same layout.
pub fn cross_trace(a: &FockRegister, b: &FockRegister, keep: &[ModeLabel]) -> Result<FockRegister> {
    a.expect(StateKind::Pure)?;
    b.expect(StateKind::Pure)?;
    if a.modes != b.modes || a.cutoffs != b.cutoffs {
        return Err(Error::ModeMismatch);
    }
    let (kept, traced) = a.split_positions(keep)?;
    let dims = a.dims();
    let st = strides(&dims);
    let ko = sub_offsets(&dims, &st, &kept);
    let to = sub_offsets(&dims, &st, &traced);
    let dk = ko.len();
    let mut data = vec![ZERO; dk * dk];
    for &t in &to {
        for (i, &ri) in ko.iter().enumerate() {
            let x = a.data[ri + t];
            if x == ZERO {
                continue;
            }
            let row = &mut data[i * dk..(i + 1) * dk];
            for (slot, &cj) in row.iter_mut().zip(&ko) {
                *slot += x * b.data[cj + t].conj();
            }
        }
    }
    let (modes, cutoffs) = a.sub_register_meta(&kept);
    Ok(FockRegister { modes, cutoffs, kind: StateKind::Mixed, data })
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: ModeLabel = ModeLabel::plain("A");
    const B: ModeLabel = ModeLabel::plain("B");

    #[test]
    fn coherent_examples() {
        let v = coherent_state(C64::new(0.0, 0.0), 5, 1e-10).unwrap();
        assert_eq!(v[0], C64::new(1.0, 0.0));
        assert!(v[1..].iter().all(|c| *c == ZERO));
        let v = coherent_state(C64::new(2.0, 0.0), 30, 1e-12).unwrap();
        let n: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        assert!(n >= 1.0 - 1e-12);
        let v = coherent_state(C64::new(1.0, 0.0), 20, 1e-10).unwrap();
        assert_eq!(v[1] / v[0], C64::new(1.0, 0.0));
    }

    #[test]
    fn coherent_reports_deficit() {
        match coherent_state(C64::new(3.0, 0.0), 5, 1e-10) {
            Err(Error::Truncation { deficit, .. }) => assert!(deficit > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn policy_meets_tolerance_up_to_three() {
        let p = TruncationPolicy::default();
        for i in 0..=30 {
            let b = i as f64 * 0.1;
            let n = p.coherent_cutoff(b);
            assert!(n >= p.amplitude_rule(b));
            assert!(poisson_tail(b * b, n) <= p.eps);
        }
    }

    #[test]
    fn poisson_tail_against_complement() {
        let m = 1.7;
        let head: f64 = (0..=6).map(|k| libm::exp(-m) * m.powi(k) / (1..=k).map(|x| x as f64).product::<f64>()).sum();
        assert!((poisson_tail(m, 6) - (1.0 - head)).abs() < 1e-14);
    }

    #[test]
    fn squeezed_ratio() {
        let amps = squeezed_amplitudes(-0.061, 20);
        let ratio = amps[2].re / amps[0].re;
        assert!((ratio + libm::tanh(-0.061) / 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn product_partial_trace() {
        let a = FockRegister::single_mode(A, coherent_amplitudes(C64::new(0.3, 0.1), 8));
        let b = FockRegister::single_mode(B, coherent_amplitudes(C64::new(-0.2, 0.4), 8));
        let ab = a.tensor(&b).unwrap().to_mixed();
        let ra = ab.partial_trace(&[A]).unwrap();
        let expect = a.to_mixed().scaled(C64::new(b.norm_sqr(), 0.0));
        for (x, y) in ra.data().iter().zip(expect.data()) {
            assert!((x - y).norm() < 1e-12);
        }
        let same = ab.partial_trace(&[A, B]).unwrap();
        assert_eq!(same, ab);
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let psi = FockRegister::from_pure(
            vec![A, B],
            vec![1, 1],
            vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)],
        )
        .unwrap();
        let r = psi.to_mixed().partial_trace(&[B]).unwrap();
        assert!((r.entry(&[0], &[0]).unwrap().re - 0.5).abs() < 1e-15);
        assert!((r.entry(&[1], &[1]).unwrap().re - 0.5).abs() < 1e-15);
        assert!(r.entry(&[0], &[1]).unwrap().norm() < 1e-15);
        let r2 = psi.partial_trace(&[B]).unwrap();
        assert_eq!(r, r2);
    }

    #[test]
    fn identity_is_bitwise_noop() {
        let a = FockRegister::single_mode(A, coherent_amplitudes(C64::new(0.7, -0.2), 6));
        let b = FockRegister::single_mode(B, coherent_amplitudes(C64::new(0.1, 0.9), 5));
        let ab = a.tensor(&b).unwrap();
        let id = CMatrix::identity(7, 7);
        assert_eq!(ab.apply_operator(&id, &[A]).unwrap(), ab);
        let m = ab.to_mixed();
        assert_eq!(m.apply_operator(&CMatrix::identity(6, 6), &[B]).unwrap(), m);
    }

    #[test]
    fn permute_and_apply_agree() {
        let a = FockRegister::single_mode(A, coherent_amplitudes(C64::new(0.7, -0.2), 3));
        let b = FockRegister::single_mode(B, coherent_amplitudes(C64::new(0.1, 0.9), 2));
        let ab = a.tensor(&b).unwrap();
        let ba = b.tensor(&a).unwrap();
        assert_eq!(ab.permuted(&[B, A]).unwrap(), ba);
        let op = CMatrix::from_fn(4, 4, |i, j| C64::new(i as f64 + 0.5 * j as f64, (i as f64) - (j as f64)));
        let x = ab.apply_operator(&op, &[A]).unwrap().permuted(&[B, A]).unwrap();
        let y = ba.apply_operator(&op, &[A]).unwrap();
        for (p, q) in x.data().iter().zip(y.data()) {
            assert!((p - q).norm() < 1e-13);
        }
    }

    #[test]
    fn mixed_evolution_matches_pure() {
        let a = FockRegister::single_mode(A, coherent_amplitudes(C64::new(0.4, 0.3), 4));
        let b = FockRegister::single_mode(B, coherent_amplitudes(C64::new(0.2, -0.1), 3));
        let ab = a.tensor(&b).unwrap();
        let op = CMatrix::from_fn(20, 20, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + j) % 3) as f64));
        let lhs = ab.apply_operator(&op, &[B, A]).unwrap().to_mixed();
        let rhs = ab.to_mixed().apply_operator(&op, &[B, A]).unwrap();
        for (p, q) in lhs.data().iter().zip(rhs.data()) {
            assert!((p - q).norm() < 1e-11);
        }
    }

    #[test]
    fn errors_are_reported() {
        let a = FockRegister::single_mode(A, coherent_amplitudes(C64::new(0.4, 0.3), 4));
        assert!(matches!(
            a.apply_operator(&CMatrix::identity(3, 3), &[A]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(a.apply_operator(&CMatrix::identity(5, 5), &[B]), Err(Error::UnknownMode(_))));
        assert!(matches!(a.to_mixed().partial_trace(&[]), Err(Error::EmptyKeep)));
        let b = FockRegister::single_mode(B, coherent_amplitudes(C64::new(0.4, 0.3), 4));
        assert!(matches!(inner_product(&a, &b), Err(Error::ModeMismatch)));
    }

    #[test]
    fn vacuum_overlap_and_orthogonality() {
        let beta = C64::new(0.8, -0.6);
        let v = FockRegister::vacuum(&[(A, 15)]).unwrap();
        let c = FockRegister::single_mode(A, coherent_amplitudes(beta, 15));
        let o = inner_product(&v, &c).unwrap();
        assert!((o.re - libm::exp(-0.5 * beta.norm_sqr())).abs() < 1e-12 && o.im.abs() < 1e-15);
        let f1 = FockRegister::fock_state(&[(A, 3, 1), (B, 3, 2)]).unwrap();
        let f2 = FockRegister::fock_state(&[(A, 3, 2), (B, 3, 1)]).unwrap();
        assert_eq!(inner_product(&f1, &f2).unwrap(), ZERO);
    }

    #[test]
    fn schmidt_rebuilds_state() {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let a0 = coherent_amplitudes(C64::new(0.5, 0.0), 6);
        let a1 = coherent_amplitudes(C64::new(-0.5, 0.0), 6);
        let (a0, a1) = (&a0, &a1);
        let cat: Vec<C64> = (0..7).flat_map(|i| (0..7).map(move |j| (a0[i] * a0[j] + a1[i] * a1[j]) * s)).collect();
        let psi = FockRegister::from_pure(vec![A, B], vec![6, 6], cat).unwrap();
        let terms = psi.schmidt(&[B], 1e-20).unwrap();
        assert_eq!(terms.len(), 2);
        let mut rebuilt = vec![ZERO; 49];
        for t in &terms {
            let prod = t.left.tensor(&t.right).unwrap().permuted(&[A, B]).unwrap();
            for (r, x) in rebuilt.iter_mut().zip(prod.data()) {
                *r += x * t.weight;
            }
        }
        for (r, x) in rebuilt.iter().zip(psi.data()) {
            assert!((r - x).norm() < 1e-13);
        }
    }

    #[test]
    fn cutoff_resize_round_trip() {
        let a = FockRegister::single_mode(A, coherent_amplitudes(C64::new(0.4, 0.3), 4));
        let big = a.with_cutoff(A, 9).unwrap();
        assert_eq!(big.cutoffs(), &[9]);
        assert_eq!(big.with_cutoff(A, 4).unwrap(), a);
    }
}
