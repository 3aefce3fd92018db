use alloc::vec;
use alloc::vec::Vec;

use crate::branch::{local_vector, BranchState};
use crate::detectors::HeraldStrategy;
use crate::elements::beam_splitter_matrix;
use crate::fock::{coherent_state, cross_trace, inner_product, FockRegister, ModeLabel, TimeBin, DEFAULT_MEMORY_BUDGET};
use crate::labels::{A_E, A_L, B, KEPT_MODES, M0, M3, M4, M5, M6, M7, S1_E, S1_L, S2_E};
use crate::linalg::{CMatrix, CVector, ZERO};
use crate::sources::DvComponent;
use crate::{math, Error, Result, C64};

use super::network::{bin_modes, bin_relabels, bin_splitters};
use super::NetworkConfig;

/// Schmidt terms with squared weight below this fraction are dropped.
const SCHMIDT_TOL: f64 = 1e-15;

/// Index of the compressed kept modes.
const K: ModeLabel = ModeLabel::ancilla(0);

/// Dense pre-detection state in factored form,
/// `|Ψ⟩ = Σ_j (V ⊗ 1)|L_j⟩ ⊗ |R_j⟩`.
///
/// `V` maps the ancilla index `k` to a product of Schmidt vectors on
/// `(A_e, A_l)` and `B`; `L_j` lives on the ancilla and the early
/// detectors, `R_j` on the late detectors.
#[derive(Debug, Clone)]
pub struct SplitState {
    kept_map: CMatrix,
    kept_cutoffs: [usize; 3],
    early: Vec<FockRegister>,
    late: Vec<FockRegister>,
    /// Amplitude mass dropped when trimming cutoffs and Schmidt spectra.
    pub truncation_deficit: f64,
}

fn check_budget(needed: usize) -> Result<()> {
    if needed > DEFAULT_MEMORY_BUDGET {
        return Err(Error::MemoryBudget { needed, budget: DEFAULT_MEMORY_BUDGET });
    }
    Ok(())
}

/// Beam splitter with output cutoffs large enough to hold every input
/// photon, so no amplitude is lost.
fn exact_bs(reg: &FockRegister, r: f64, t: f64, m1: ModeLabel, m2: ModeLabel) -> Result<FockRegister> {
    let (c1, c2) = (reg.cutoff(m1)?, reg.cutoff(m2)?);
    let out = c1 + c2;
    check_budget(reg.dim() / ((c1 + 1) * (c2 + 1)) * (out + 1) * (out + 1))?;
    let op = beam_splitter_matrix(r, t, [c1, c2], [out, out])?;
    reg.apply_map(&op, &[m1, m2], &[out, out])
}

/// Lower the cutoff of `mode` while the discarded population stays within
/// `eps` of the norm. Returns the dropped fraction.
fn trim(reg: FockRegister, mode: ModeLabel, eps: f64) -> Result<(FockRegister, f64)> {
    let marg = reg.partial_trace(&[mode])?;
    let c = reg.cutoff(mode)?;
    let p: Vec<f64> = (0..=c).map(|n| marg.entry(&[n], &[n]).map(|v| v.re)).collect::<Result<_>>()?;
    let total: f64 = p.iter().sum();
    let (mut cut, mut tail) = (c, 0.0);
    while cut > 0 && tail + p[cut] <= eps * total {
        tail += p[cut];
        cut -= 1;
    }
    Ok((reg.with_cutoff(mode, cut)?, tail / total))
}

fn add_vacuum(reg: FockRegister, mode: ModeLabel) -> Result<FockRegister> {
    if reg.modes().contains(&mode) {
        return Ok(reg);
    }
    reg.tensor(&FockRegister::vacuum(&[(mode, 0)])?)
}

/// Run one bin's BS3 to BS6 on a register holding that bin's inputs.
fn evolve_bin(reg: FockRegister, bin: TimeBin) -> Result<FockRegister> {
    let m = bin_modes(bin);
    let h = math::FRAC_1_SQRT_2;
    let mut reg = reg;
    for mode in [m.m6, m.m7, m.m2, m.aux] {
        reg = add_vacuum(reg, mode)?;
    }
    for (a, b) in bin_splitters(&m) {
        reg = exact_bs(&reg, h, h, a, b)?;
    }
    for (from, to) in bin_relabels(&m) {
        reg.relabel(from, to)?;
    }
    let mut order: Vec<ModeLabel> = reg.modes().iter().copied().filter(|x| *x == K).collect();
    order.extend_from_slice(&m.detectors);
    reg.permuted(&order)
}

/// Dense route: the factored state in front of the detectors.
pub fn split_state(cfg: &NetworkConfig, component: DvComponent) -> Result<SplitState> {
    let policy = &cfg.policy;
    let (r, t) = (cfg.r, cfg.t());
    let h = math::FRAC_1_SQRT_2;
    let late6 = M6.in_bin(TimeBin::Late);
    let early7 = M7.in_bin(TimeBin::Early);

    // CV arm: BS1, injection, BS2.
    let amps = cfg.cv_source().amplitudes(policy)?;
    let mut reg = FockRegister::vacuum(&[(M0, 0)])?.tensor(&FockRegister::single_mode(M3, amps))?;
    reg = exact_bs(&reg, r, t, M0, M3)?.relabeled(M0, M5)?.relabeled(M3, B)?;
    let ra = cfg.r_alpha();
    let inj = coherent_state(C64::new(ra, 0.0), policy.coherent_cutoff(ra), policy.eps)?;
    reg = reg.tensor(&FockRegister::single_mode(M4, inj))?;
    reg = exact_bs(&reg, h, h, M5, M4)?.relabeled(M5, late6)?.relabeled(M4, early7)?;
    let (reg, d6) = trim(reg, late6, policy.eps)?;
    let (reg, d7) = trim(reg, early7, policy.eps)?;
    let cv = reg.schmidt(&[B], SCHMIDT_TOL)?;

    // DV pair: photon 1 becomes mode A.
    let dv = cfg.dv.component_state(component).relabeled(S1_E, A_E)?.relabeled(S1_L, A_L)?;
    let dvs = dv.schmidt(&[A_E, A_L], SCHMIDT_TOL)?;

    let dropped = |norm: f64, kept: f64| (1.0 - kept / norm).max(0.0);
    let cv_norm = reg.norm_sqr();
    let cv_kept: f64 = cv.iter().map(|s| s.weight * s.weight).sum();
    let dv_kept: f64 = dvs.iter().map(|s| s.weight * s.weight).sum();
    let mut deficit = d6 + d7 + dropped(cv_norm, cv_kept) + dropped(dv.norm_sqr(), dv_kept);

    // Joint register [K, 6l, 7e, 2e, 2l] with k = s·n_dv + d.
    let nk = cv.len() * dvs.len();
    let mut data = Vec::new();
    let mut right_meta = None;
    for s in &cv {
        for d in &dvs {
            let w = s.right.tensor(&d.right)?;
            let scale = s.weight * d.weight;
            data.extend(w.data().iter().map(|x| x * scale));
            right_meta.get_or_insert_with(|| (w.modes().to_vec(), w.cutoffs().to_vec()));
        }
    }
    let (rm, rc) = right_meta.ok_or(Error::EmptyKeep)?;
    let mut modes = vec![K];
    modes.extend(rm);
    let mut cuts = vec![nk - 1];
    cuts.extend(rc);
    let joint = FockRegister::from_pure(modes, cuts, data)?;

    // Early | late split.
    let late2 = S2_E.in_bin(TimeBin::Late);
    let joint = joint.permuted(&[K, early7, S2_E, late6, late2])?;
    let terms = joint.schmidt(&[K, early7, S2_E], SCHMIDT_TOL)?;
    let joint_norm = joint.norm_sqr();
    let kept: f64 = terms.iter().map(|s| s.weight * s.weight).sum();
    deficit += dropped(joint_norm, kept);
    let mut early = Vec::with_capacity(terms.len());
    let mut late = Vec::with_capacity(terms.len());
    for term in terms {
        early.push(evolve_bin(term.left.scaled(C64::new(term.weight, 0.0)), TimeBin::Early)?);
        late.push(evolve_bin(term.right, TimeBin::Late)?);
    }

    // V: |k⟩ ↦ x_d ⊗ u_s on (A_e, A_l, B).
    let c_a = dvs[0].left.cutoffs()[0];
    let c_b = cv[0].left.cutoffs()[0];
    let rows = (c_a + 1) * (c_a + 1) * (c_b + 1);
    let mut kept_map = CMatrix::zeros(rows, nk);
    for (si, s) in cv.iter().enumerate() {
        for (di, d) in dvs.iter().enumerate() {
            let col = product_vector(&[d.left.data().to_vec(), s.left.data().to_vec()]);
            kept_map.set_column(si * dvs.len() + di, &CVector::from_vec(col));
        }
    }
    Ok(SplitState { kept_map, kept_cutoffs: [c_a, c_a, c_b], early, late, truncation_deficit: deficit })
}

/// Apply the non-identity elements of `strategy` that act on modes of
/// `reg` to its ket side.
fn measure(reg: &FockRegister, strategy: &HeraldStrategy) -> Result<FockRegister> {
    let mut out = reg.clone();
    for a in strategy.assignments().iter().filter(|a| !a.is_identity() && reg.modes().contains(&a.mode)) {
        let c = out.cutoff(a.mode)?;
        out = out.apply_left(&a.matrix(c)?, &[a.mode])?;
    }
    Ok(out)
}

/// `Σ_i conj(v_i) data[offset·len + i]`.
fn dot_conj(v: &[C64], data: &[C64]) -> C64 {
    v.iter().zip(data).map(|(a, b)| a.conj() * b).sum()
}

fn product_vector(factors: &[Vec<C64>]) -> Vec<C64> {
    let mut prod = vec![C64::new(1.0, 0.0)];
    for f in factors {
        let mut next = Vec::with_capacity(prod.len() * f.len());
        for p in &prod {
            for x in f {
                next.push(p * x);
            }
        }
        prod = next;
    }
    prod
}

impl SplitState {
    /// Number of early-late product terms.
    pub fn term_count(&self) -> usize {
        self.early.len()
    }

    pub fn norm_sqr(&self) -> Result<f64> {
        let mut acc = ZERO;
        for (lj, rj) in self.early.iter().zip(&self.late) {
            for (lk, rk) in self.early.iter().zip(&self.late) {
                acc += inner_product(lj, lk)? * inner_product(rj, rk)?;
            }
        }
        Ok(acc.re)
    }

    /// `Tr_det[Π |Ψ⟩⟨Ψ|]` on `(A_e, A_l, B)`, unnormalised.
    pub fn herald_operator(&self, strategy: &HeraldStrategy) -> Result<FockRegister> {
        let kept = strategy.kept();
        if kept.len() != 3 || KEPT_MODES.iter().any(|m| !kept.contains(m)) {
            return Err(Error::Capability("the factored dense route keeps exactly (A_e, A_l, B)"));
        }
        let pl: Vec<FockRegister> = self.early.iter().map(|l| measure(l, strategy)).collect::<Result<_>>()?;
        let pr: Vec<FockRegister> = self.late.iter().map(|r| measure(r, strategy)).collect::<Result<_>>()?;
        let nk = self.kept_map.ncols();
        let mut rho_k = CMatrix::zeros(nk, nk);
        for (j, plj) in pl.iter().enumerate() {
            for (jp, ljp) in self.early.iter().enumerate() {
                let g = inner_product(&self.late[jp], &pr[j])?;
                if g == ZERO {
                    continue;
                }
                rho_k += cross_trace(plj, ljp, &[K])?.as_matrix()? * g;
            }
        }
        let rho = &self.kept_map * rho_k * self.kept_map.adjoint();
        FockRegister::from_matrix(KEPT_MODES.to_vec(), self.kept_cutoffs.to_vec(), &rho)
    }

    /// `⟨branch|Ψ⟩`, with the branch terms evaluated at this state's
    /// cutoffs.
    pub fn overlap_with_branch(&self, b: &BranchState) -> Result<C64> {
        let terms = b.expand()?;
        let early_modes = bin_modes(TimeBin::Early).detectors;
        let late_modes = bin_modes(TimeBin::Late).detectors;
        let pos = |m: ModeLabel| b.position(m);
        let kept_pos = [pos(A_E)?, pos(A_L)?, pos(B)?];
        let early_pos: Vec<usize> = early_modes.iter().map(|&m| pos(m)).collect::<Result<_>>()?;
        let late_pos: Vec<usize> = late_modes.iter().map(|&m| pos(m)).collect::<Result<_>>()?;
        let early_cut: Vec<usize> = early_modes.iter().map(|&m| self.early[0].cutoff(m)).collect::<Result<_>>()?;
        let late_cut: Vec<usize> = late_modes.iter().map(|&m| self.late[0].cutoff(m)).collect::<Result<_>>()?;
        let nk = self.kept_map.ncols();
        let mut total = ZERO;
        for term in &terms {
            let local = |p: usize, c: usize| local_vector(term.displacement[p], term.powers[p], c);
            let t_ab = product_vector(&[
                local(kept_pos[0], self.kept_cutoffs[0]),
                local(kept_pos[1], self.kept_cutoffs[1]),
                local(kept_pos[2], self.kept_cutoffs[2]),
            ]);
            let g: Vec<C64> = (0..nk)
                .map(|k| t_ab.iter().enumerate().map(|(i, a)| a.conj() * self.kept_map[(i, k)]).sum())
                .collect();
            let t_e = product_vector(&early_pos.iter().zip(&early_cut).map(|(&p, &c)| local(p, c)).collect::<Vec<_>>());
            let t_l = product_vector(&late_pos.iter().zip(&late_cut).map(|(&p, &c)| local(p, c)).collect::<Vec<_>>());
            let de = t_e.len();
            let mut acc = ZERO;
            for (l, r) in self.early.iter().zip(&self.late) {
                let rl = dot_conj(&t_l, r.data());
                if rl == ZERO {
                    continue;
                }
                let mut s = ZERO;
                for (k, gk) in g.iter().enumerate() {
                    s += gk * dot_conj(&t_e, &l.data()[k * de..(k + 1) * de]);
                }
                acc += s * rl;
            }
            total += term.coefficient.conj() * acc;
        }
        Ok(total)
    }
}
