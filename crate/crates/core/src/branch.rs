//! Branch engine: states written as short sums of `c · D(β) P(a†) |0⟩`,
//! with `β` a displacement vector over all modes and `P` a polynomial in
//! creation operators.
//!
//! Beam splitters act on `β` and on `P` without changing the number of
//! branches. Evaluation expands every branch into monomials, each of
//! which is a product state, and builds per-mode vectors
//! `D(β)(a†)^k|0⟩ = (a† − β*)^k |β⟩` in a small local Fock basis.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::detectors::{normalize_outcome, HeraldOutcome, HeraldStrategy, PROBABILITY_FLOOR};
use crate::elements::{check_beam_splitter, ElementKind, ElementSpec};
use crate::fock::{coherent_amplitudes, FockRegister, ModeLabel, StateKind, TruncationPolicy};
use crate::linalg::{CMatrix, ONE, ZERO};
use crate::{math, Error, Result, C64};

pub const DEFAULT_BRANCH_LIMIT: usize = 64;

/// Polynomial terms below this fraction of the largest coefficient are
/// treated as exact cancellations and dropped.
const CANCEL_TOL: f64 = 1e-14;

/// Exponent of `a†` per mode.
pub type Monomial = Vec<u8>;

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub coefficient: C64,
    pub displacement: Vec<C64>,
    pub excitation: BTreeMap<Monomial, C64>,
}

impl Branch {
    /// `c · D(β)|0⟩`.
    pub fn displaced_vacuum(coefficient: C64, displacement: Vec<C64>) -> Self {
        let n = displacement.len();
        let mut excitation = BTreeMap::new();
        excitation.insert(vec![0u8; n], ONE);
        Self { coefficient, displacement, excitation }
    }

    /// Largest power of a single creation operator.
    pub fn max_power(&self) -> u8 {
        self.excitation.keys().flat_map(|m| m.iter().copied()).max().unwrap_or(0)
    }

    fn prune(&mut self) {
        let largest = self.excitation.values().map(|c| c.norm()).fold(0.0, f64::max);
        self.excitation.retain(|_, c| c.norm() > CANCEL_TOL * largest && *c != ZERO);
    }
}

/// A single monomial term of an expanded branch: a product state.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: C64,
    pub displacement: Vec<C64>,
    pub powers: Monomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    modes: Vec<ModeLabel>,
    branches: Vec<Branch>,
    limit: usize,
}

fn check_unique(modes: &[ModeLabel]) -> Result<()> {
    for (i, m) in modes.iter().enumerate() {
        if modes[..i].contains(m) {
            return Err(Error::DuplicateMode(*m));
        }
    }
    Ok(())
}

impl BranchState {
    pub fn new(modes: Vec<ModeLabel>, branches: Vec<Branch>) -> Result<Self> {
        check_unique(&modes)?;
        for b in &branches {
            if b.displacement.len() != modes.len() || b.excitation.keys().any(|k| k.len() != modes.len()) {
                return Err(Error::DimensionMismatch { expected: modes.len(), found: b.displacement.len() });
            }
        }
        Ok(Self { modes, branches, limit: DEFAULT_BRANCH_LIMIT })
    }

    pub fn vacuum(modes: &[ModeLabel]) -> Result<Self> {
        Self::new(modes.to_vec(), vec![Branch::displaced_vacuum(ONE, vec![ZERO; modes.len()])])
    }

    /// `|β⟩` on one mode.
    pub fn coherent(mode: ModeLabel, beta: C64) -> Self {
        Self::new(vec![mode], vec![Branch::displaced_vacuum(ONE, vec![beta])]).expect("one mode")
    }

    /// `(|α⟩ + |−α⟩)/𝒩`.
    pub fn cat_plus(mode: ModeLabel, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::OutOfRange { name: "alpha", value: alpha });
        }
        let norm = math::SQRT_2 * math::sqrt(1.0 + math::exp(-2.0 * alpha * alpha));
        let c = C64::new(1.0 / norm, 0.0);
        let a = C64::new(alpha, 0.0);
        Self::new(
            vec![mode],
            vec![Branch::displaced_vacuum(c, vec![a]), Branch::displaced_vacuum(c, vec![-a])],
        )
    }

    /// Undisplaced state `Σ c_m (a†)^m |0⟩` given by monomial coefficients.
    pub fn from_polynomial(modes: Vec<ModeLabel>, poly: &[(Monomial, C64)]) -> Result<Self> {
        let n = modes.len();
        let mut excitation = BTreeMap::new();
        for (m, c) in poly {
            if m.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: m.len() });
            }
            *excitation.entry(m.clone()).or_insert(ZERO) += *c;
        }
        Self::new(modes, vec![Branch { coefficient: ONE, displacement: vec![ZERO; n], excitation }])
    }

    /// Number state `|n⟩` on one mode.
    pub fn fock(mode: ModeLabel, n: u8) -> Self {
        let c = C64::new(1.0 / math::sqrt_factorial(n as usize), 0.0);
        Self::from_polynomial(vec![mode], &[(vec![n], c)]).expect("one mode")
    }

    pub fn with_limit(mut self, limit: usize) -> Self {
        self.limit = limit;
        self
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn modes(&self) -> &[ModeLabel] {
        &self.modes
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn position(&self, mode: ModeLabel) -> Result<usize> {
        self.modes.iter().position(|m| *m == mode).ok_or(Error::UnknownMode(mode))
    }

    /// Number of product-state terms after expanding every polynomial.
    pub fn term_count(&self) -> usize {
        self.branches.iter().map(|b| b.excitation.len()).sum()
    }

    /// Product states making up the state, checked against the branch
    /// limit.
    pub fn expand(&self) -> Result<Vec<Term>> {
        let needed = self.term_count();
        if needed > self.limit {
            return Err(Error::BranchLimit { needed, limit: self.limit });
        }
        Ok(self
            .branches
            .iter()
            .flat_map(|b| {
                b.excitation.iter().map(move |(m, c)| Term {
                    coefficient: b.coefficient * c,
                    displacement: b.displacement.clone(),
                    powers: m.clone(),
                })
            })
            .collect())
    }

    /// `self ⊗ other`; branches multiply out.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut modes = self.modes.clone();
        modes.extend_from_slice(&other.modes);
        check_unique(&modes)?;
        let mut branches = Vec::with_capacity(self.branches.len() * other.branches.len());
        for a in &self.branches {
            for b in &other.branches {
                let mut displacement = a.displacement.clone();
                displacement.extend_from_slice(&b.displacement);
                let mut excitation = BTreeMap::new();
                for (ma, ca) in &a.excitation {
                    for (mb, cb) in &b.excitation {
                        let mut m = ma.clone();
                        m.extend_from_slice(mb);
                        excitation.insert(m, ca * cb);
                    }
                }
                branches.push(Branch { coefficient: a.coefficient * b.coefficient, displacement, excitation });
            }
        }
        Ok(Self { modes, branches, limit: self.limit.max(other.limit) })
    }

    pub fn relabel(&mut self, from: ModeLabel, to: ModeLabel) -> Result<()> {
        let p = self.position(from)?;
        if from != to && self.modes.contains(&to) {
            return Err(Error::DuplicateMode(to));
        }
        self.modes[p] = to;
        Ok(())
    }

    /// Beam splitter on `(m1, m2)` with the crate-wide convention.
    pub fn apply_beam_splitter(&self, r: f64, t: f64, modes: (ModeLabel, ModeLabel)) -> Result<Self> {
        check_beam_splitter(r, t)?;
        let i = self.position(modes.0)?;
        let j = self.position(modes.1)?;
        if i == j {
            return Err(Error::DuplicateMode(modes.0));
        }
        let mut out = self.clone();
        for b in &mut out.branches {
            let (b1, b2) = (b.displacement[i], b.displacement[j]);
            b.displacement[i] = b1 * t - b2 * r;
            b.displacement[j] = b1 * r + b2 * t;
            let mut next: BTreeMap<Monomial, C64> = BTreeMap::new();
            for (m, c) in &b.excitation {
                let (ki, kj) = (m[i] as usize, m[j] as usize);
                if ki == 0 && kj == 0 {
                    *next.entry(m.clone()).or_insert(ZERO) += *c;
                    continue;
                }
                // a_i† → t a_i† + r a_j†, a_j† → −r a_i† + t a_j†
                for a in 0..=ki {
                    let ca = math::binomial(ki, a) * math::powi(t, a as u32) * math::powi(r, (ki - a) as u32);
                    if ca == 0.0 {
                        continue;
                    }
                    for bb in 0..=kj {
                        let cb = math::binomial(kj, bb) * math::powi(-r, bb as u32) * math::powi(t, (kj - bb) as u32);
                        if cb == 0.0 {
                            continue;
                        }
                        let mut key = m.clone();
                        key[i] = (a + bb) as u8;
                        key[j] = (ki - a + kj - bb) as u8;
                        *next.entry(key).or_insert(ZERO) += *c * (ca * cb);
                    }
                }
            }
            b.excitation = next;
            b.prune();
        }
        Ok(out)
    }

    /// `D(γ)` on one mode: `D(γ)D(β) = e^{(γβ* − γ*β)/2} D(γ + β)`.
    pub fn apply_displacement(&self, gamma: C64, mode: ModeLabel) -> Result<Self> {
        let i = self.position(mode)?;
        let mut out = self.clone();
        for b in &mut out.branches {
            let beta = b.displacement[i];
            let phase = (gamma * beta.conj() - gamma.conj() * beta) * 0.5;
            b.coefficient *= phase.exp();
            b.displacement[i] = beta + gamma;
        }
        Ok(out)
    }

    /// Apply a unitary element; squeezing and channels are rejected.
    pub fn apply_element(&self, e: &ElementSpec) -> Result<Self> {
        match e.kind {
            ElementKind::BeamSplitter { r, t } => self.apply_beam_splitter(r, t, (e.targets[0], e.targets[1])),
            ElementKind::Displacement(g) => self.apply_displacement(g, e.targets[0]),
            ElementKind::Squeeze(_) => Err(Error::Capability("squeezing has no finite branch form")),
            ElementKind::Loss { .. } | ElementKind::Depolarize { .. } => {
                Err(Error::Capability("channels produce mixed states; use the dense engine"))
            }
        }
    }

    /// Local cutoff for every mode: enough for the widest term.
    pub fn local_cutoffs(&self, policy: &TruncationPolicy) -> Vec<usize> {
        let mut cut = vec![0usize; self.modes.len()];
        for b in &self.branches {
            for (m, c) in cut.iter_mut().enumerate() {
                let k = b.excitation.keys().map(|e| e[m] as usize).max().unwrap_or(0);
                let beta = b.displacement[m].norm();
                let need = if beta == 0.0 { k } else { local_cutoff(policy, beta, k as u8) };
                *c = (*c).max(need);
            }
        }
        cut
    }

    /// Dense amplitudes of the expansion.
    pub fn to_dense(&self, policy: &TruncationPolicy, budget: usize) -> Result<FockRegister> {
        self.to_dense_with_cutoffs(&self.local_cutoffs(policy), policy, budget)
    }

    pub fn to_dense_with_cutoffs(
        &self,
        cutoffs: &[usize],
        policy: &TruncationPolicy,
        budget: usize,
    ) -> Result<FockRegister> {
        if cutoffs.len() != self.modes.len() {
            return Err(Error::DimensionMismatch { expected: self.modes.len(), found: cutoffs.len() });
        }
        let needed = cutoffs.iter().try_fold(1usize, |acc, c| acc.checked_mul(c + 1)).unwrap_or(usize::MAX);
        if needed > budget {
            return Err(Error::MemoryBudget { needed, budget });
        }
        let terms = self.expand()?;
        let mut cache = LocalCache::new(policy.eps);
        let mut data = vec![ZERO; needed];
        for term in &terms {
            let factors: Vec<Vec<C64>> = (0..self.modes.len())
                .map(|m| cache.get(term.displacement[m], term.powers[m], cutoffs[m]).cloned())
                .collect::<Result<_>>()?;
            let mut prod = vec![term.coefficient];
            for f in factors {
                let mut next = Vec::with_capacity(prod.len() * f.len());
                for p in &prod {
                    for x in f.iter() {
                        next.push(p * x);
                    }
                }
                prod = next;
            }
            for (d, p) in data.iter_mut().zip(prod) {
                *d += p;
            }
        }
        FockRegister::from_pure(self.modes.clone(), cutoffs.to_vec(), data)
    }

    /// `⟨self|other⟩` for states on the same mode list.
    pub fn inner_product(&self, other: &Self, policy: &TruncationPolicy) -> Result<C64> {
        if self.modes != other.modes {
            return Err(Error::ModeMismatch);
        }
        let a = self.expand()?;
        let b = other.expand()?;
        let ca = self.local_cutoffs(policy);
        let cb = other.local_cutoffs(policy);
        let cut: Vec<usize> = ca.iter().zip(&cb).map(|(x, y)| *x.max(y)).collect();
        let mut cache = LocalCache::new(policy.eps);
        let mut total = ZERO;
        for x in &a {
            for y in &b {
                let mut acc = x.coefficient.conj() * y.coefficient;
                for (m, &c) in cut.iter().enumerate() {
                    let u = cache.get(x.displacement[m], x.powers[m], c)?.clone();
                    let v = cache.get(y.displacement[m], y.powers[m], c)?;
                    acc *= u.iter().zip(v).map(|(p, q)| p.conj() * q).sum::<C64>();
                    if acc == ZERO {
                        break;
                    }
                }
                total += acc;
            }
        }
        Ok(total)
    }

    pub fn norm_sqr(&self, policy: &TruncationPolicy) -> Result<f64> {
        Ok(self.inner_product(self, policy)?.re)
    }

    /// Unnormalised conditional operator `Tr_detected[Π ρ]` on the kept
    /// modes, and its trace.
    pub fn expectation(&self, strategy: &HeraldStrategy, policy: &TruncationPolicy) -> Result<(FockRegister, f64)> {
        strategy.validate(&self.modes)?;
        let terms = self.expand()?;
        let cut = self.local_cutoffs(policy);
        let kept: Vec<usize> = (0..self.modes.len()).filter(|&m| strategy.kept().contains(&self.modes[m])).collect();
        let measured: Vec<usize> = (0..self.modes.len()).filter(|m| !kept.contains(m)).collect();
        let povms: Vec<(usize, Option<Vec<f64>>, Option<CMatrix>)> = measured
            .iter()
            .map(|&m| {
                let e = strategy.element(self.modes[m]);
                if e.is_identity() {
                    return Ok((m, None, None));
                }
                let diag = e.diagonal(cut[m]);
                let full = if diag.is_none() { Some(e.matrix(cut[m])?) } else { None };
                Ok((m, diag, full))
            })
            .collect::<Result<_>>()?;

        let mut cache = LocalCache::new(policy.eps);
        let n = terms.len();
        // Kept-mode product vectors, one column per term.
        let dk: usize = kept.iter().map(|&m| cut[m] + 1).product();
        let mut psi = CMatrix::zeros(dk, n);
        for (j, t) in terms.iter().enumerate() {
            let mut prod = vec![ONE];
            for &m in &kept {
                let f = cache.get(t.displacement[m], t.powers[m], cut[m])?;
                let mut next = Vec::with_capacity(prod.len() * f.len());
                for p in &prod {
                    for x in f.iter() {
                        next.push(p * x);
                    }
                }
                prod = next;
            }
            for (i, v) in prod.into_iter().enumerate() {
                psi[(i, j)] = v;
            }
        }
        // Measured-mode weights w[b][b'] = c_b c̄_b' Π_m ⟨v_b'|Π_m|v_b⟩.
        let mut w = CMatrix::zeros(n, n);
        for b in 0..n {
            for bp in 0..=b {
                let tb = &terms[b];
                let tp = &terms[bp];
                let mut acc = tb.coefficient * tp.coefficient.conj();
                for (m, diag, full) in &povms {
                    if acc == ZERO {
                        break;
                    }
                    let m = *m;
                    let u = cache.get(tb.displacement[m], tb.powers[m], cut[m])?.clone();
                    let v = cache.get(tp.displacement[m], tp.powers[m], cut[m])?;
                    let e = match (diag, full) {
                        (Some(d), _) => u.iter().zip(v).zip(d).map(|((x, y), p)| y.conj() * x * *p).sum::<C64>(),
                        (None, Some(f)) => {
                            let mut s = ZERO;
                            for (i, y) in v.iter().enumerate() {
                                for (k, x) in u.iter().enumerate() {
                                    s += y.conj() * f[(i, k)] * x;
                                }
                            }
                            s
                        }
                        (None, None) => u.iter().zip(v).map(|(x, y)| y.conj() * x).sum::<C64>(),
                    };
                    acc *= e;
                }
                w[(b, bp)] = acc;
                w[(bp, b)] = acc.conj();
            }
        }
        let rho = &psi * &w * psi.adjoint();
        let kept_modes: Vec<ModeLabel> = kept.iter().map(|&m| self.modes[m]).collect();
        let kept_cut: Vec<usize> = kept.iter().map(|&m| cut[m]).collect();
        let reg = FockRegister::from_matrix(kept_modes, kept_cut, &rho)?;
        debug_assert_eq!(reg.kind(), StateKind::Mixed);
        let p = reg.trace().re;
        Ok((reg, p))
    }

    /// Heralded, normalised state on the kept modes.
    pub fn herald(&self, strategy: &HeraldStrategy, policy: &TruncationPolicy) -> Result<HeraldOutcome> {
        let (rho, _) = self.expectation(strategy, policy)?;
        normalize_outcome(rho, PROBABILITY_FLOOR)
    }
}

/// Cache of local vectors `D(β)(a†)^k|0⟩` keyed by exact `β`, `k` and
/// cutoff.
struct LocalCache {
    eps: f64,
    map: BTreeMap<(u64, u64, u8, usize), Vec<C64>>,
}

impl LocalCache {
    fn new(eps: f64) -> Self {
        Self { eps, map: BTreeMap::new() }
    }

    fn get(&mut self, beta: C64, k: u8, cutoff: usize) -> Result<&Vec<C64>> {
        let key = (beta.re.to_bits(), beta.im.to_bits(), k, cutoff);
        if !self.map.contains_key(&key) {
            let v = local_vector(beta, k, cutoff);
            let deficit = local_tail(beta, k, cutoff);
            if deficit > self.eps {
                return Err(Error::Truncation { deficit, tolerance: self.eps });
            }
            self.map.insert(key, v);
        }
        Ok(&self.map[&key])
    }
}

/// Relative mass of `D(β)(a†)^k|0⟩` above `cutoff`, summed directly so
/// that tails far below machine epsilon are resolved.
pub fn local_tail(beta: C64, k: u8, cutoff: usize) -> f64 {
    let exact = math::powi(math::sqrt_factorial(k as usize), 2);
    let v = local_vector(beta, k, cutoff + LOCAL_TAIL_SPAN);
    v[cutoff + 1..].iter().map(|x| x.norm_sqr()).sum::<f64>() / exact
}

const LOCAL_TAIL_SPAN: usize = 96;

/// Smallest cutoff at which `D(β)(a†)^k|0⟩` keeps all but `eps` of its
/// norm. Starts from the policy's displaced-mode rule.
pub fn local_cutoff(policy: &TruncationPolicy, beta_abs: f64, k: u8) -> usize {
    let mut c = policy.displaced_cutoff(beta_abs, k as usize);
    while local_tail(C64::new(beta_abs, 0.0), k, c) > policy.eps {
        c += 1;
    }
    c
}

/// `D(β)(a†)^k|0⟩ = (a† − β*)^k |β⟩` on `cutoff + 1` levels.
pub fn local_vector(beta: C64, k: u8, cutoff: usize) -> Vec<C64> {
    let k = k as usize;
    let len = cutoff + k + 1;
    let mut v = coherent_amplitudes(beta, len - 1);
    let bc = beta.conj();
    for _ in 0..k {
        let mut next = vec![ZERO; len];
        for n in 0..len {
            let raised = if n > 0 { v[n - 1] * math::sqrt(n as f64) } else { ZERO };
            next[n] = raised - v[n] * bc;
        }
        v = next;
    }
    v.truncate(cutoff + 1);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detectors::onoff_povm;
    use crate::elements::displacement_matrix;
    use crate::fock::{inner_product, DEFAULT_MEMORY_BUDGET};

    const X: ModeLabel = ModeLabel::plain("X");
    const Y: ModeLabel = ModeLabel::plain("Y");

    fn policy() -> TruncationPolicy {
        TruncationPolicy::default()
    }

    #[test]
    fn local_vector_matches_dense_displacement() {
        let beta = C64::new(0.3, -0.4);
        let d = displacement_matrix(beta, 40);
        for k in 0..4u8 {
            let v = local_vector(beta, k, 20);
            let f = math::sqrt_factorial(k as usize);
            for (n, x) in v.iter().enumerate() {
                assert!((x - d[(n, k as usize)] * f).norm() < 1e-12, "k={k} n={n}");
            }
        }
    }

    #[test]
    fn vacuum_branch_unchanged_by_beam_splitter() {
        let s = BranchState::vacuum(&[X, Y]).unwrap();
        let out = s.apply_beam_splitter(0.6, 0.8, (X, Y)).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn balanced_routing() {
        let g = C64::new(0.4, 0.0);
        let s = BranchState::coherent(X, g).tensor(&BranchState::coherent(Y, g)).unwrap();
        let out = s.apply_beam_splitter(math::FRAC_1_SQRT_2, math::FRAC_1_SQRT_2, (X, Y)).unwrap();
        let b = &out.branches()[0];
        assert!(b.displacement[0].norm() < 1e-16);
        assert!((b.displacement[1] - g * math::SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn fock_one_to_dense() {
        let d = BranchState::fock(X, 1).to_dense(&policy(), DEFAULT_MEMORY_BUDGET).unwrap();
        assert_eq!(d.data(), &[ZERO, ONE]);
    }

    #[test]
    fn cat_norm() {
        let c = BranchState::cat_plus(X, 2.0).unwrap();
        let d = c.to_dense(&policy(), DEFAULT_MEMORY_BUDGET).unwrap();
        assert!((d.norm_sqr() - 1.0).abs() < 1e-10);
        assert!((c.norm_sqr(&policy()).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn beam_splitter_agrees_with_dense() {
        let poly = [(vec![1u8, 0], C64::new(0.6, 0.0)), (vec![0, 2], C64::new(0.0, 0.4))];
        let s = BranchState::from_polynomial(vec![X, Y], &poly)
            .unwrap()
            .apply_displacement(C64::new(0.2, 0.1), X)
            .unwrap();
        let (r, t) = (0.35, (1.0f64 - 0.35 * 0.35).sqrt());
        let out = s.apply_beam_splitter(r, t, (X, Y)).unwrap();
        let cut = [14, 14];
        let dense_in = s.to_dense_with_cutoffs(&cut, &policy(), DEFAULT_MEMORY_BUDGET).unwrap();
        let bs = crate::elements::beam_splitter_matrix(r, t, cut, cut).unwrap();
        let dense_out = dense_in.apply_operator(&bs, &[X, Y]).unwrap();
        let via_branch = out.to_dense_with_cutoffs(&cut, &policy(), DEFAULT_MEMORY_BUDGET).unwrap();
        let o = inner_product(&via_branch, &dense_out).unwrap();
        let n = (via_branch.norm_sqr() * dense_out.norm_sqr()).sqrt();
        assert!((o / n - 1.0).norm() < 1e-10);
    }

    #[test]
    fn off_probability_closed_form() {
        let beta = C64::new(0.2, 0.1);
        let eta = 0.95;
        let s = BranchState::coherent(X, beta).tensor(&BranchState::vacuum(&[Y]).unwrap()).unwrap();
        let (off, _) = onoff_povm(eta, X).unwrap();
        let strat = HeraldStrategy::new(vec![off], vec![Y]).unwrap();
        let (_, p) = s.expectation(&strat, &policy()).unwrap();
        assert!((p - (-eta * beta.norm_sqr()).exp()).abs() < 1e-10);
        let id = HeraldStrategy::identity(vec![Y]).unwrap();
        assert!((s.expectation(&id, &policy()).unwrap().1 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn branch_limit_enforced() {
        let s = BranchState::cat_plus(X, 1.0).unwrap().with_limit(1);
        assert!(matches!(s.expand(), Err(Error::BranchLimit { needed: 2, limit: 1 })));
    }

    #[test]
    fn squeezing_rejected() {
        let s = BranchState::vacuum(&[X]).unwrap();
        let e = ElementSpec::squeeze(0.1, X).unwrap();
        assert!(matches!(s.apply_element(&e), Err(Error::Capability(_))));
    }
}
