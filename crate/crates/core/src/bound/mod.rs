//! Upper bounds `min ∫ f h` over sum-of-squares densities `h` of degree at most `2r`.
//!
//! The order-`r` bound is the smallest generalized eigenvalue of the pencil `(A, B)` with
//! `A[α][β] = Σ_δ f_δ m(α+β+δ)` and `B[α][β] = m(α+β)`, both indexed by the graded-lex monomial
//! basis of degree `≤ r`. Both matrices depend on `α+β` only, so the pencil is built from the
//! two moment vectors `a_γ = Σ_δ f_δ m(γ+δ)` and `m_γ`, assembled exactly.
//!
//! The eigenproblem is reduced to standard form in double-double arithmetic after an exact
//! power-of-two diagonal scaling. The reported value is the exact Rayleigh quotient of the
//! returned eigenvector, so it is always `∫ f h / ∫ h` for an explicit square `h`.

mod dd;
mod eigen;

use std::collections::HashMap;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::moments::{Domain, MomentTable};
use crate::numeric;
use crate::poly::{MultiIndex, Polynomial};

pub use eigen::smallest_generalized_eigenpair;

/// Largest accepted condition number of the diagonally equilibrated moment matrix.
pub const COND_LIMIT: f64 = 1e24;

/// Graded-lex ordered monomial exponents of total degree `≤ r` in `n` variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonomialBasis {
    pub n: usize,
    pub r: u32,
    pub indices: Vec<MultiIndex>,
}

impl MonomialBasis {
    pub fn new(n: usize, r: u32) -> Self {
        MonomialBasis { n, r, indices: MultiIndex::all_up_to(n, r) }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundResult {
    pub r: u32,
    pub value: f64,
    /// Coefficients over the basis, normalized to `vᵀ B v = 1`.
    pub eigvec: Vec<f64>,
    /// The density `(vᵀ b(x))²`, normalized to unit integral over the domain.
    pub density: Polynomial,
    /// 1-norm condition number of the equilibrated `B`; this is what the solver limit applies to.
    pub cond_b: f64,
    /// 1-norm condition number of `B` as assembled, before equilibration.
    pub cond_b_raw: f64,
    pub residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct BoundOptions {
    /// Map a box to `[-1, 1]^n` before assembling the matrices.
    pub rescale: bool,
}

/// Exact pencil matrices, mainly for inspection and debugging.
#[derive(Clone, Debug)]
pub struct ExactPencil {
    pub a: Vec<Vec<BigRational>>,
    pub b: Vec<Vec<BigRational>>,
    /// Both matrices carry an implicit factor `π^pi_power`.
    pub pi_power: u32,
    pub basis: MonomialBasis,
}

pub fn assemble_ab_exact(f: &Polynomial, dom: &Domain, r: u32) -> Result<ExactPencil> {
    let table = MomentTable::new(dom, 2 * r + f.degree());
    let pencil = Pencil::new(f, &table, r)?;
    let basis = MonomialBasis::new(dom.dim(), r);
    let idx = pencil.index_matrix(&basis);
    let pick = |v: &[BigRational]| {
        idx.iter().map(|row| row.iter().map(|&k| v[k].clone()).collect()).collect()
    };
    Ok(ExactPencil { a: pick(&pencil.a), b: pick(&pencil.m), pi_power: dom.pi_power(), basis })
}

/// `A`, `B` and the basis in floating point, with the full moment values (π included).
pub fn assemble_ab(f: &Polynomial, dom: &Domain, r: u32) -> Result<(DMatrix<f64>, DMatrix<f64>, MonomialBasis)> {
    let exact = assemble_ab_exact(f, dom, r)?;
    let pi = std::f64::consts::PI.powi(exact.pi_power as i32);
    let n = exact.basis.len();
    let conv = |m: &[Vec<BigRational>]| DMatrix::from_fn(n, n, |i, j| numeric::to_f64(&m[i][j]) * pi);
    Ok((conv(&exact.a), conv(&exact.b), exact.basis))
}

/// Plain-text dump: one row per line, entries as exact `p/q` rationals.
pub fn dump_matrix(m: &[Vec<BigRational>]) -> String {
    let mut out = String::new();
    for row in m {
        let cells: Vec<String> = row.iter().map(numeric::format_rational).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// Moment vectors `a_γ`, `m_γ` for all `|γ| ≤ 2·r_max`, shared by every order up to `r_max`.
pub struct Pencil {
    n: usize,
    r_max: u32,
    domain: Domain,
    index: HashMap<MultiIndex, usize>,
    a: Vec<BigRational>,
    m: Vec<BigRational>,
    a_dd: Vec<TwoFloat>,
    m_dd: Vec<TwoFloat>,
}

impl Pencil {
    pub fn new(f: &Polynomial, table: &MomentTable, r_max: u32) -> Result<Self> {
        let dom = table.domain();
        let n = dom.dim();
        if f.n_vars() != n {
            return Err(Error::DimensionMismatch { expected: n, found: f.n_vars() });
        }
        let needed = 2 * r_max + f.degree();
        if table.max_degree() < needed {
            return Err(Error::InsufficientDegree {
                needed: needed as usize,
                available: table.max_degree() as usize,
            });
        }
        let gammas = MultiIndex::all_up_to(n, 2 * r_max);
        let f_terms: Vec<(&MultiIndex, &BigRational)> = f.terms().collect();
        let pairs: Vec<(BigRational, BigRational)> = gammas
            .par_iter()
            .map(|g| -> Result<(BigRational, BigRational)> {
                let mut a = BigRational::zero();
                for (d, c) in &f_terms {
                    let m = table.get(&g.add(d))?;
                    if !m.is_zero() {
                        a += *c * m;
                    }
                }
                Ok((a, table.get(g)?))
            })
            .collect::<Result<_>>()?;
        let (a, m): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let a_dd = a.par_iter().map(numeric::to_twofloat).collect();
        let m_dd = m.par_iter().map(numeric::to_twofloat).collect();
        let index = gammas.into_iter().enumerate().map(|(i, g)| (g, i)).collect();
        Ok(Pencil { n, r_max, domain: dom.clone(), index, a, m, a_dd, m_dd })
    }

    pub fn r_max(&self) -> u32 {
        self.r_max
    }

    fn index_matrix(&self, basis: &MonomialBasis) -> Vec<Vec<usize>> {
        basis
            .indices
            .iter()
            .map(|a| basis.indices.iter().map(|b| self.index[&a.add(b)]).collect())
            .collect()
    }

    pub fn solve(&self, r: u32) -> Result<BoundResult> {
        if r > self.r_max {
            return Err(Error::InsufficientDegree {
                needed: 2 * r as usize,
                available: 2 * self.r_max as usize,
            });
        }
        let start = Instant::now();
        let basis = MonomialBasis::new(self.n, r);
        let size = basis.len();
        let idx = self.index_matrix(&basis);

        // Exact power-of-two equilibration: B_s = S B S with unit-order diagonal.
        let scale: Vec<f64> = (0..size)
            .map(|i| {
                let d = self.m_dd[idx[i][i]].hi();
                2f64.powi(-(0.5 * d.log2()).round() as i32)
            })
            .collect();
        let mut bs = dd::DdMatrix::zeros(size);
        let mut as_ = dd::DdMatrix::zeros(size);
        for i in 0..size {
            for j in 0..size {
                let s = scale[i] * scale[j];
                bs.set(i, j, self.m_dd[idx[i][j]] * s);
                as_.set(i, j, self.a_dd[idx[i][j]] * s);
            }
        }

        let l = dd::cholesky(&bs).map_err(|_| Error::Conditioning { cond_b: f64::INFINITY })?;
        let w = dd::lower_inverse(&l);
        let cond_b = bs.norm1_f64() * inverse_norm1(&w, &vec![1.0; size]);
        let raw_norm = (0..size)
            .map(|j| (0..size).map(|i| self.m_dd[idx[i][j]].hi().abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let cond_b_raw = raw_norm * inverse_norm1(&w, &scale);
        if !(cond_b <= COND_LIMIT) {
            return Err(Error::Conditioning { cond_b });
        }

        let c = dd::congruence(&w, &as_);
        let c64 = DMatrix::from_fn(size, size, |i, j| c.at(i, j).hi());
        let eig = SymmetricEigen::new(c64);
        let k = eig.eigenvalues.imin();
        let y: Vec<TwoFloat> = eig.eigenvectors.column(k).iter().map(|&v| TwoFloat::from(v)).collect();

        let x = dd::lower_transpose_mul(&w, &y);
        let mut v: Vec<TwoFloat> = x.iter().zip(&scale).map(|(xi, s)| *xi * *s).collect();
        sign_normalize(&mut v);
        let (ints, _) = numeric::common_dyadic(&v);

        // h = p² with p = Σ ints_α x^α, collected by γ = α+β.
        let mut h: HashMap<usize, BigInt> = HashMap::new();
        for i in 0..size {
            if ints[i].is_zero() {
                continue;
            }
            for j in i..size {
                if ints[j].is_zero() {
                    continue;
                }
                let mut t = &ints[i] * &ints[j];
                if i != j {
                    t *= 2;
                }
                *h.entry(idx[i][j]).or_insert_with(BigInt::zero) += t;
            }
        }
        let mut num = BigRational::zero();
        let mut den = BigRational::zero();
        for (&g, hg) in &h {
            let hq = BigRational::from_integer(hg.clone());
            num += &hq * &self.a[g];
            den += hq * &self.m[g];
        }
        if !den.is_positive() {
            return Err(Error::Conditioning { cond_b });
        }
        let value = numeric::to_f64(&(&num / &den));

        let pi_power = self.domain.pi_power();
        let inv_pi = numeric::from_f64(std::f64::consts::PI.powi(-(pi_power as i32)));
        let norm = if pi_power == 0 { den.clone() } else { &den / &inv_pi };
        let gammas: HashMap<usize, &MultiIndex> = self.index.iter().map(|(g, &i)| (i, g)).collect();
        let density_terms = h.iter().map(|(g, hg)| {
            let mut c = BigRational::from_integer(hg.clone()) / &den;
            if pi_power != 0 {
                c *= &inv_pi;
            }
            ((*gammas[g]).clone(), c)
        });
        let density = Polynomial::from_terms(self.n, density_terms)?;

        let biggest = ints.iter().map(|z| z.abs()).max().unwrap_or_else(BigInt::zero);
        let rel_norm = numeric::to_f64(&(&norm / BigRational::from_integer(&biggest * &biggest)));
        let eigvec = ints
            .iter()
            .map(|z| numeric::to_f64(&BigRational::new(z.clone(), biggest.clone())) / rel_norm.sqrt())
            .collect();

        let xs: Vec<TwoFloat> = v.iter().zip(&scale).map(|(vi, s)| *vi * s.recip()).collect();
        let ax = dd::sym_mul(&as_, &xs);
        let bx = dd::sym_mul(&bs, &xs);
        let lam = TwoFloat::from(value);
        let res: Vec<TwoFloat> = ax.iter().zip(&bx).map(|(p, q)| *p - lam * *q).collect();
        let residual = dd::norm2(&res).hi() / dd::norm2(&bx).hi();

        Ok(BoundResult { r, value, eigvec, density, cond_b, cond_b_raw, residual, seconds: start.elapsed().as_secs_f64() })
    }
}

/// `‖S WᵀW S‖₁` for lower-triangular `W = L⁻¹` and diagonal `S`: the 1-norm of `(S⁻¹ B_s S⁻¹)⁻¹`.
fn inverse_norm1(w: &dd::DdMatrix, scale: &[f64]) -> f64 {
    let n = w.n;
    let w64: Vec<f64> = w.data.iter().map(|v| v.hi()).collect();
    let mut best = 0.0f64;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for k in i.max(j)..n {
                s += w64[k * n + i] * w64[k * n + j];
            }
            col += f64::abs(s * scale[i] * scale[j]);
        }
        best = best.max(col);
    }
    best
}

/// Flips `v` so that its first significant coordinate is positive.
fn sign_normalize(v: &mut [TwoFloat]) {
    let big = v.iter().map(|x| x.hi().abs()).fold(0.0, f64::max);
    if let Some(first) = v.iter().find(|x| x.hi().abs() > 1e-12 * big) {
        if first.hi() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Box maps `x = c + h ⊙ y` onto `[-1, 1]^n`; returns `f∘T`, the reference box, scale and shift.
fn rescale_box(f: &Polynomial, dom: &Domain) -> Result<Option<(Polynomial, Domain, Vec<BigRational>, Vec<BigRational>)>> {
    let Domain::Box { bounds } = dom else { return Ok(None) };
    let two = BigRational::from_integer(2.into());
    let half: Vec<BigRational> = bounds.iter().map(|(lo, hi)| (hi - lo) / &two).collect();
    let center: Vec<BigRational> = bounds.iter().map(|(lo, hi)| (hi + lo) / &two).collect();
    let g = f.substitute_affine(&half, &center)?;
    Ok(Some((g, Domain::cube(dom.dim(), "-1", "1")?, half, center)))
}

/// Pulls a density on `[-1,1]^n` back to the original box: `h(x) = h̃((x−c)/h) / ∏h`.
fn pull_back(density: &Polynomial, half: &[BigRational], center: &[BigRational]) -> Result<Polynomial> {
    let inv: Vec<BigRational> = half.iter().map(|h| h.recip()).collect();
    let shift: Vec<BigRational> = center.iter().zip(&inv).map(|(c, i)| -(c * i)).collect();
    let jac = inv.iter().fold(BigRational::from_integer(1.into()), |acc, i| acc * i);
    Ok(density.substitute_affine(&inv, &shift)?.scale(&jac))
}

pub fn compute_bound(f: &Polynomial, dom: &Domain, r: u32) -> Result<BoundResult> {
    compute_bound_with(f, dom, r, BoundOptions::default())
}

pub fn compute_bound_with(f: &Polynomial, dom: &Domain, r: u32, opts: BoundOptions) -> Result<BoundResult> {
    Ok(sweep_range(f, dom, r, r, opts)?.into_result()?.remove(0))
}

#[derive(Clone, Debug)]
pub struct SweepWarning {
    pub r: u32,
    pub error: Error,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub results: Vec<BoundResult>,
    /// Set when a conditioning failure cut the sweep short.
    pub warning: Option<SweepWarning>,
}

impl SweepOutcome {
    /// The results, or the first error if nothing at all was computed.
    pub fn into_result(self) -> Result<Vec<BoundResult>> {
        match (self.results.is_empty(), self.warning) {
            (true, Some(w)) => Err(w.error),
            _ => Ok(self.results),
        }
    }
}

/// Bounds for `r = 1..=r_max` from a single moment table.
pub fn bound_sweep(f: &Polynomial, dom: &Domain, r_max: u32) -> Result<SweepOutcome> {
    if r_max < 1 {
        return Err(Error::InvalidArgument("r_max must be at least 1".into()));
    }
    sweep_range(f, dom, 1, r_max, BoundOptions::default())
}

pub fn sweep_range(f: &Polynomial, dom: &Domain, r_lo: u32, r_hi: u32, opts: BoundOptions) -> Result<SweepOutcome> {
    if r_lo > r_hi {
        return Err(Error::InvalidArgument(format!("empty order range {r_lo}..{r_hi}")));
    }
    if f.n_vars() != dom.dim() {
        return Err(Error::DimensionMismatch { expected: dom.dim(), found: f.n_vars() });
    }
    let rescaled = if opts.rescale { rescale_box(f, dom)? } else { None };
    let (work_f, work_dom) = match &rescaled {
        Some((g, d, _, _)) => (g, d),
        None => (f, dom),
    };
    let table = MomentTable::new(work_dom, 2 * r_hi + work_f.degree());
    let pencil = Pencil::new(work_f, &table, r_hi)?;
    let mut results = Vec::new();
    for r in r_lo..=r_hi {
        match pencil.solve(r) {
            Ok(mut res) => {
                if let Some((_, _, half, center)) = &rescaled {
                    res.density = pull_back(&res.density, half, center)?;
                }
                results.push(res);
            }
            Err(error @ Error::Conditioning { .. }) => {
                return Ok(SweepOutcome { results, warning: Some(SweepWarning { r, error }) });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SweepOutcome { results, warning: None })
}
