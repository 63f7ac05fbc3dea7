//! Sampling from a polynomial density by the method of conditional distributions.
//!
//! The marginal `f_{1..i}` is obtained from `f_{1..i+1}` by integrating out `x_{i+1}`
//! exactly. Coordinate `x_i` is then drawn by inverting the conditional cumulative
//! distribution `F_i(t | x_1..x_{i-1})`, a univariate polynomial in `t`.

use std::io::Write;

use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::moments::Domain;
use crate::numeric::{self, dd_div};
use crate::poly::Polynomial;

const DEGENERATE_DENOMINATOR: f64 = 1e-12;
const MAX_RETRIES: usize = 100;
const BISECTION_WIDTH: f64 = 1e-12;

/// `Σ_k c_k(prefix) t^k` with each `c_k` a sparse polynomial in the prefix coordinates.
#[derive(Clone, Debug)]
struct SlicedPoly {
    coeffs: Vec<Vec<(Vec<u32>, TwoFloat)>>,
}

impl SlicedPoly {
    /// Slices `p` along coordinate `var`, keeping only prefix variables `< var`.
    fn new(p: &Polynomial, var: usize) -> Self {
        let mut coeffs: Vec<Vec<(Vec<u32>, TwoFloat)>> = vec![Vec::new(); p.degree_in(var) as usize + 1];
        for (alpha, c) in p.terms() {
            let k = alpha.get(var) as usize;
            coeffs[k].push((alpha.exponents()[..var].to_vec(), numeric::to_twofloat(c)));
        }
        SlicedPoly { coeffs }
    }

    /// Replaces each `c_k t^k` by `c_k t^{k+1}/(k+1)`.
    fn antiderivative(&self) -> Self {
        let mut coeffs = vec![Vec::new()];
        for (k, ck) in self.coeffs.iter().enumerate() {
            let d = TwoFloat::from((k + 1) as f64);
            coeffs.push(ck.iter().map(|(e, c)| (e.clone(), dd_div(*c, d))).collect());
        }
        SlicedPoly { coeffs }
    }

    fn at_prefix(&self, prefix: &[f64]) -> Vec<TwoFloat> {
        self.coeffs
            .iter()
            .map(|terms| {
                let mut acc = TwoFloat::from(0.0);
                for (e, c) in terms {
                    let mut m = *c;
                    for (x, &p) in prefix.iter().zip(e) {
                        for _ in 0..p {
                            m = m * *x;
                        }
                    }
                    acc += m;
                }
                acc
            })
            .collect()
    }
}

fn horner(coeffs: &[TwoFloat], t: f64) -> TwoFloat {
    let mut acc = TwoFloat::from(0.0);
    for c in coeffs.iter().rev() {
        acc = acc * t + *c;
    }
    acc
}

/// Marginals of a normalized density on a box or the standard simplex.
#[derive(Clone, Debug)]
pub struct ConditionalChain {
    domain: Domain,
    /// `marginals[i]` is `f_{1..i+1}`; the last entry is the density itself.
    marginals: Vec<Polynomial>,
    density_slices: Vec<SlicedPoly>,
    cdf_slices: Vec<SlicedPoly>,
}

pub fn build_chain(h: &Polynomial, dom: &Domain) -> Result<ConditionalChain> {
    if let Domain::Ball { .. } = dom {
        return Err(Error::UnsupportedDomain("ball"));
    }
    let n = dom.dim();
    if h.n_vars() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h.n_vars() });
    }
    let integral = dom.integrate_poly(h)?.to_f64();
    if !((integral - 1.0).abs() <= 1e-6) {
        return Err(Error::NotNormalized { integral });
    }
    let mut marginals = vec![h.clone()];
    for var in (1..n).rev() {
        let (lo, hi) = limits(dom, var);
        let next = marginals.last().unwrap().definite_integrate(var, &lo, &hi)?;
        marginals.push(next);
    }
    marginals.reverse();
    let density_slices: Vec<SlicedPoly> = marginals.iter().enumerate().map(|(i, m)| SlicedPoly::new(m, i)).collect();
    let cdf_slices = density_slices.iter().map(SlicedPoly::antiderivative).collect();
    Ok(ConditionalChain { domain: dom.clone(), marginals, density_slices, cdf_slices })
}

/// Integration limits of coordinate `var` as polynomials in the earlier coordinates.
fn limits(dom: &Domain, var: usize) -> (Polynomial, Polynomial) {
    let n = dom.dim();
    match dom {
        Domain::Box { bounds } => {
            let (lo, hi) = &bounds[var];
            (Polynomial::constant(n, lo.clone()), Polynomial::constant(n, hi.clone()))
        }
        _ => {
            let mut upper = Polynomial::one(n);
            for k in 0..var {
                upper = upper.sub(&Polynomial::var(n, k)).expect("same dimension");
            }
            (Polynomial::zero(n), upper)
        }
    }
}

fn limits_f64(dom: &Domain, var: usize, prefix: &[f64]) -> (f64, f64) {
    match dom {
        Domain::Box { .. } => dom.bounds_f64()[var],
        _ => (0.0, (1.0 - prefix.iter().sum::<f64>()).max(0.0)),
    }
}

impl ConditionalChain {
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// `f_{1..i+1}` for 0-based `i`.
    pub fn marginal(&self, i: usize) -> &Polynomial {
        &self.marginals[i]
    }

    pub fn marginals(&self) -> &[Polynomial] {
        &self.marginals
    }

    /// The conditional cumulative distribution of coordinate `i` (0-based) given `prefix`.
    pub fn conditional_cdf(&self, i: usize, prefix: &[f64]) -> Result<UnivariateCdf> {
        if prefix.len() != i || i >= self.dim() {
            return Err(Error::DimensionMismatch { expected: i.min(self.dim()), found: prefix.len() });
        }
        let (lo, hi) = limits_f64(&self.domain, i, prefix);
        let g = self.cdf_slices[i].at_prefix(prefix);
        let g_lo = horner(&g, lo);
        let denom = horner(&g, hi) - g_lo;
        if !(denom.hi() >= DEGENERATE_DENOMINATOR) {
            return Err(Error::DegeneratePrefix { denominator: denom.hi() });
        }
        let density = self.density_slices[i].at_prefix(prefix);
        Ok(UnivariateCdf { lo, hi, g, g_lo, denom, density })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let mut last = Error::DegeneratePrefix { denominator: 0.0 };
        'retry: for _ in 0..MAX_RETRIES {
            let mut x = Vec::with_capacity(self.dim());
            for i in 0..self.dim() {
                let u: f64 = rng.random();
                match self.conditional_cdf(i, &x) {
                    Ok(cdf) => x.push(invert_cdf(&cdf, u)?),
                    Err(e @ Error::DegeneratePrefix { .. }) => {
                        last = e;
                        continue 'retry;
                    }
                    Err(e) => return Err(e),
                }
            }
            return Ok(x);
        }
        Err(last)
    }
}

/// `F(t) = (G(t) − G(lo)) / (G(hi) − G(lo))` on `[lo, hi]`, `G` an antiderivative of the
/// unnormalized conditional density.
#[derive(Clone, Debug)]
pub struct UnivariateCdf {
    pub lo: f64,
    pub hi: f64,
    g: Vec<TwoFloat>,
    g_lo: TwoFloat,
    denom: TwoFloat,
    density: Vec<TwoFloat>,
}

impl UnivariateCdf {
    pub fn eval(&self, t: f64) -> f64 {
        dd_div(horner(&self.g, t) - self.g_lo, self.denom).hi()
    }

    /// `F'(t)`, the normalized conditional density.
    pub fn pdf(&self, t: f64) -> f64 {
        dd_div(horner(&self.density, t), self.denom).hi()
    }

    /// Monomial coefficients of `F` in `t`, lowest degree first.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.g.iter().map(|g| dd_div(*g, self.denom).hi()).collect();
        c[0] = dd_div(self.g[0] - self.g_lo, self.denom).hi();
        c
    }
}

/// `min{t : F(t) ≥ u}` by bisection to width `1e-12`, then one safeguarded Newton step.
pub fn invert_cdf(cdf: &UnivariateCdf, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::ProbabilityOutOfRange(u));
    }
    let (mut a, mut b) = (cdf.lo, cdf.hi);
    while b - a > BISECTION_WIDTH {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if cdf.eval(mid) >= u {
            b = mid;
        } else {
            a = mid;
        }
    }
    let x = 0.5 * (a + b);
    let slope = cdf.pdf(x);
    if slope > 0.0 {
        let newton = x - (cdf.eval(x) - u) / slope;
        if newton >= a && newton <= b {
            return Ok(newton);
        }
    }
    Ok(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleBatch {
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
    pub values: Vec<f64>,
}

/// Draws `count` points; point `k` uses its own ChaCha8 stream `k` under `seed`, so the batch
/// does not depend on how the work is scheduled.
pub fn sample(chain: &ConditionalChain, f: &Polynomial, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    if f.n_vars() != chain.dim() {
        return Err(Error::DimensionMismatch { expected: chain.dim(), found: f.n_vars() });
    }
    let fv = f.to_f64_terms();
    let pairs: Vec<(Vec<f64>, f64)> = (0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let x = chain.draw(&mut rng)?;
            let v = fv.eval(&x);
            Ok((x, v))
        })
        .collect::<Result<_>>()?;
    let (points, values) = pairs.into_iter().unzip();
    Ok(SampleBatch { points, seed, values })
}

/// Fraction of sampled points with `f(x) ≥ bound + eps·(bound − f_min)`.
///
/// Points with `f(x) = f_min` never count, so a zero gap `bound = f_min` reports no exceedance.
pub fn markov_check(f: &Polynomial, batch: &SampleBatch, bound: f64, f_min: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if !(bound >= f_min) {
        return Err(Error::InvalidArgument(format!("bound {bound} is below f_min {f_min}")));
    }
    let threshold = (1.0 + eps) * (bound - f_min);
    let fv = f.to_f64_terms();
    let hits = batch
        .points
        .iter()
        .filter(|x| {
            let gap = fv.eval(x) - f_min;
            gap >= threshold && gap > 0.0
        })
        .count();
    Ok(hits as f64 / batch.points.len() as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub std_error: f64,
}

pub fn summarize(values: &[f64]) -> SampleSummary {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    SampleSummary { count: values.len(), mean, variance, min, std_error: (variance / n).sqrt() }
}

/// CSV with header `x1,...,xn,f`; floats use the shortest round-trip representation.
pub fn write_csv<W: Write>(batch: &SampleBatch, mut out: W) -> std::io::Result<()> {
    let n = batch.points.first().map_or(0, Vec::len);
    let header: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain(["f".to_string()]).collect();
    writeln!(out, "{}", header.join(","))?;
    for (x, v) in batch.points.iter().zip(&batch.values) {
        let row: Vec<String> = x.iter().chain([v]).map(|c| format!("{c:?}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn sidecar_json(batch: &SampleBatch, bound: f64, dom: &Domain) -> serde_json::Value {
    serde_json::json!({
        "seed": batch.seed,
        "count": batch.points.len(),
        "bound": bound,
        "domain": dom,
    })
}

/// Uniform density `1/vol(K)` as a polynomial.
pub fn uniform_density(dom: &Domain) -> Result<Polynomial> {
    let vol = dom.volume();
    if vol.pi_power != 0 {
        return Err(Error::UnsupportedDomain("ball"));
    }
    Ok(Polynomial::constant(dom.dim(), BigRational::one() / vol.coef))
}
