//! State-quality functionals: fidelity, DV projection, Wigner function,
//! negativity of the partial transpose and purity.

use alloc::vec;
use alloc::vec::Vec;

use crate::fock::{FockRegister, ModeLabel, StateKind};
use crate::labels::{A_E, A_L};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::{math, Error, Result, C64};

/// `⟨φ|ρ|φ⟩`. The target is permuted to the state's mode order; cutoffs
/// must agree. A pure `rho` gives `|⟨φ|ψ⟩|²`.
pub fn fidelity(rho: &FockRegister, target: &FockRegister) -> Result<f64> {
    if target.kind() != StateKind::Pure {
        return Err(Error::WrongKind { expected: "pure" });
    }
    let phi = target.permuted(rho.modes())?;
    if phi.cutoffs() != rho.cutoffs() {
        return Err(Error::ModeMismatch);
    }
    let v = phi.data();
    match rho.kind() {
        StateKind::Pure => {
            let ov: C64 = v.iter().zip(rho.data()).map(|(a, b)| a.conj() * b).sum();
            Ok(ov.norm_sqr())
        }
        StateKind::Mixed => {
            let d = v.len();
            let data = rho.data();
            let mut acc = ZERO;
            for (i, a) in v.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                let row = &data[i * d..(i + 1) * d];
                let inner: C64 = row.iter().zip(v).map(|(x, b)| x * b).sum();
                acc += a.conj() * inner;
            }
            Ok(acc.re)
        }
    }
}

/// `(c_e |1,0⟩ + c_l |0,1⟩)/‖·‖` on `(A_e, A_l)`.
pub fn dv_superposition(early: C64, late: C64) -> Result<FockRegister> {
    let norm = math::sqrt(early.norm_sqr() + late.norm_sqr());
    if norm == 0.0 {
        return Err(Error::DegenerateOutcome { probability: 0.0 });
    }
    let data = vec![ZERO, late / norm, early / norm, ZERO];
    FockRegister::from_pure(vec![A_E, A_L], vec![1, 1], data)
}

/// Normalised single-mode CV state and the probability of the DV outcome.
#[derive(Debug, Clone)]
pub struct Conditional {
    pub state: FockRegister,
    pub probability: f64,
}

/// Project the DV modes of `rho` onto the pure state `dv` and return the
/// conditional state of the remaining modes.
pub fn project_dv(rho: &FockRegister, dv: &FockRegister, floor: f64) -> Result<Conditional> {
    if dv.kind() != StateKind::Pure {
        return Err(Error::WrongKind { expected: "pure" });
    }
    let dv_modes = dv.modes().to_vec();
    let rest: Vec<ModeLabel> = rho.modes().iter().copied().filter(|m| !dv_modes.contains(m)).collect();
    if rest.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let mut order = dv_modes.clone();
    order.extend_from_slice(&rest);
    let rho = rho.to_mixed().permuted(&order)?;
    let mut d = dv.clone();
    for (m, &c) in dv_modes.iter().zip(rho.cutoffs()) {
        d = d.with_cutoff(*m, c)?;
    }
    let dd = d.dim();
    let dr = rho.dim() / dd;
    let v = d.data();
    let data = rho.data();
    let n = rho.dim();
    let mut out = vec![ZERO; dr * dr];
    for (i, a) in v.iter().enumerate().filter(|(_, a)| **a != ZERO) {
        for (j, b) in v.iter().enumerate().filter(|(_, b)| **b != ZERO) {
            let w = a.conj() * b;
            for r in 0..dr {
                let row = (i * dr + r) * n + j * dr;
                for c in 0..dr {
                    out[r * dr + c] += w * data[row + c];
                }
            }
        }
    }
    let cut = rho.cutoffs()[dv_modes.len()..].to_vec();
    let state = FockRegister::from_density(rest, cut, out)?;
    let probability = state.trace().re;
    if !(probability >= floor) || probability == 0.0 {
        return Err(Error::DegenerateOutcome { probability });
    }
    Ok(Conditional { state: state.scaled(ONE / probability), probability })
}

/// Rectangular phase-space grid. Both axes have an odd number of points
/// and are centred on zero, so the origin is a grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_x: usize,
    pub n_p: usize,
}

pub const MIN_GRID_POINTS: usize = 101;
/// Quadrature points for the `u` integral.
pub const U_POINTS: usize = 1024;
/// Largest allowed deviation of `∫W` from 1.
pub const NORMALIZATION_TOL: f64 = 1e-3;

impl PhaseSpaceGrid {
    pub fn new(x_max: f64, p_max: f64, n_x: usize, n_p: usize) -> Result<Self> {
        let g = Self { x_min: -x_max, x_max, p_min: -p_max, p_max, n_x, n_p };
        g.validate()?;
        Ok(g)
    }

    /// `±(|α_f| + 4)` on both axes with the minimum point count.
    pub fn for_amplitude(alpha_f: f64) -> Self {
        let e = alpha_f.abs() + 4.0;
        Self::new(e, e, MIN_GRID_POINTS, MIN_GRID_POINTS).expect("valid default grid")
    }

    pub fn validate(&self) -> Result<()> {
        for n in [self.n_x, self.n_p] {
            if n % 2 == 0 {
                return Err(Error::InvalidGrid("point counts must be odd so the origin is on the grid"));
            }
            if n < MIN_GRID_POINTS {
                return Err(Error::InvalidGrid("at least 101 points per axis are required"));
            }
        }
        let centred = |lo: f64, hi: f64| hi > 0.0 && (lo + hi).abs() <= 1e-12 * hi;
        if !centred(self.x_min, self.x_max) || !centred(self.p_min, self.p_max) {
            return Err(Error::InvalidGrid("ranges must be symmetric about zero"));
        }
        Ok(())
    }

    pub fn xs(&self) -> Vec<f64> {
        axis(self.x_min, self.x_max, self.n_x)
    }

    pub fn ps(&self) -> Vec<f64> {
        axis(self.p_min, self.p_max, self.n_p)
    }

    fn cell(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64 * (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }
}

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let h = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if 2 * i + 1 == n { 0.0 } else { lo + h * i as f64 }).collect()
}

/// Wigner function sampled on a grid, `values[i * n_p + j] = W(x_i, p_j)`.
#[derive(Debug, Clone)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn negativity(&self) -> f64 {
        (-self.min()).max(0.0)
    }

    /// Trapezoid-rule `∫W dx dp`.
    pub fn integral(&self) -> f64 {
        let (nx, np) = (self.grid.n_x, self.grid.n_p);
        let mut s = 0.0;
        for i in 0..nx {
            let wx = if i == 0 || i + 1 == nx { 0.5 } else { 1.0 };
            for j in 0..np {
                let wp = if j == 0 || j + 1 == np { 0.5 } else { 1.0 };
                s += wx * wp * self.values[i * np + j];
            }
        }
        s * self.grid.cell()
    }
}

/// Fock wavefunctions `ψ_n(x)`, `n ≤ cutoff`, for the quadrature
/// `x = (a + a†)/2`.
pub fn fock_wavefunctions(x: f64, cutoff: usize) -> Vec<f64> {
    let xi = math::SQRT_2 * x;
    let mut out = vec![0.0; cutoff + 1];
    // 2^{1/4} π^{−1/4} e^{−ξ²/2}
    out[0] = math::pow(2.0 / math::PI, 0.25) * math::exp(-0.5 * xi * xi);
    if cutoff >= 1 {
        out[1] = math::SQRT_2 * xi * out[0];
    }
    for n in 1..cutoff {
        let nf = n as f64;
        out[n + 1] = math::sqrt(2.0 / (nf + 1.0)) * xi * out[n] - math::sqrt(nf / (nf + 1.0)) * out[n - 1];
    }
    out
}

fn single_mode_matrix(rho: &FockRegister) -> Result<CMatrix> {
    if rho.modes().len() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: rho.modes().len() });
    }
    rho.to_mixed().as_matrix()
}

/// `W(x, p) = (1/π)∫⟨x + u/2|ρ|x − u/2⟩ e^{−2ipu} du` on `grid`, by the
/// trapezoid rule over `u ∈ ±2 x_max`. Fails when `∫W` misses 1 by more
/// than [`NORMALIZATION_TOL`].
pub fn wigner(rho: &FockRegister, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    grid.validate()?;
    let m = single_mode_matrix(rho)?;
    let cutoff = m.nrows() - 1;
    let (xs, ps) = (grid.xs(), grid.ps());
    let u_max = 2.0 * grid.x_max.abs().max(grid.x_min.abs());
    let h = 2.0 * u_max / (U_POINTS - 1) as f64;
    let us: Vec<f64> = (0..U_POINTS).map(|k| -u_max + h * k as f64).collect();
    let mut values = vec![0.0; xs.len() * ps.len()];
    let mut f = vec![ZERO; U_POINTS];
    for (i, &x) in xs.iter().enumerate() {
        for (k, &u) in us.iter().enumerate() {
            let a = fock_wavefunctions(x + 0.5 * u, cutoff);
            let b = fock_wavefunctions(x - 0.5 * u, cutoff);
            let mut acc = ZERO;
            for (n, an) in a.iter().enumerate().filter(|(_, v)| **v != 0.0) {
                let row: C64 = b.iter().enumerate().map(|(l, bl)| m[(n, l)] * *bl).sum();
                acc += row * *an;
            }
            f[k] = acc;
        }
        for (j, &p) in ps.iter().enumerate() {
            let step = C64::from_polar(1.0, -2.0 * p * h);
            let mut phase = C64::from_polar(1.0, 2.0 * p * u_max);
            let mut s = 0.0;
            for (k, fk) in f.iter().enumerate() {
                let w = if k == 0 || k + 1 == U_POINTS { 0.5 } else { 1.0 };
                s += w * (fk * phase).re;
                phase *= step;
            }
            values[i * ps.len() + j] = s * h / math::PI;
        }
    }
    let field = WignerField { grid: *grid, xs, ps, values };
    let integral = field.integral();
    if !((integral - 1.0).abs() <= NORMALIZATION_TOL * rho.trace().re.max(1.0)) {
        return Err(Error::GridTooCoarse { integral });
    }
    Ok(field)
}

/// `max(0, −min W)` on a grid covering `±(√⟨n⟩ + 4)`.
pub fn wigner_negativity(rho: &FockRegister) -> Result<f64> {
    let m = single_mode_matrix(rho)?;
    let tr = m.trace().re;
    let mean: f64 = (0..m.nrows()).map(|n| n as f64 * m[(n, n)].re).sum::<f64>() / tr;
    let grid = PhaseSpaceGrid::for_amplitude(math::sqrt(mean.max(0.0)));
    Ok(wigner(rho, &grid)?.negativity())
}

/// `Tr ρ²`.
pub fn purity(rho: &FockRegister) -> Result<f64> {
    let m = rho.to_mixed().as_matrix()?;
    Ok((&m * &m).trace().re)
}

/// Upper clamp applied to [`npt`].
pub const NPT_CEILING: f64 = 1.0 + 1e-6;
/// Hermiticity deviation tolerated before [`npt`] refuses its input.
pub const HERMITICITY_TOL: f64 = 1e-9;

/// Negativity of the partial transpose, `2 Σ |λ_neg|`, with the transpose
/// taken on `dv_modes`. A two-qubit Bell state scores 1.
pub fn npt(rho: &FockRegister, dv_modes: &[ModeLabel]) -> Result<f64> {
    let rho = rho.to_mixed();
    let deviation = rho.hermiticity_deviation();
    if deviation > HERMITICITY_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let rest: Vec<ModeLabel> = rho.modes().iter().copied().filter(|m| !dv_modes.contains(m)).collect();
    if rest.is_empty() || rest.len() + dv_modes.len() != rho.modes().len() {
        return Err(Error::ModeMismatch);
    }
    let mut order = dv_modes.to_vec();
    order.extend_from_slice(&rest);
    let p = rho.permuted(&order)?;
    let m = p.as_matrix()?;
    let da: usize = p.cutoffs()[..dv_modes.len()].iter().map(|c| c + 1).product();
    let db = m.nrows() / da;
    let mut pt = CMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..da {
        for j in 0..da {
            for a in 0..db {
                for b in 0..db {
                    pt[(j * db + a, i * db + b)] = m[(i * db + a, j * db + b)];
                }
            }
        }
    }
    let neg: f64 = linalg::hermitian_eigenvalues(&pt).into_iter().filter(|&l| l < 0.0).map(|l| -l).sum();
    Ok((2.0 * neg).clamp(0.0, NPT_CEILING))
}

/// [`npt`] with the time-bin modes `(A_e, A_l)` as the DV factor.
pub fn hybrid_npt(rho: &FockRegister) -> Result<f64> {
    npt(rho, &[A_E, A_L])
}
