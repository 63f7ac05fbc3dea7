//! Dense lower-triangular kernels in double-double arithmetic.

use twofloat::TwoFloat;

use crate::numeric::dd_div;

/// Row-major square matrix of double-double entries.
#[derive(Clone, Debug)]
pub(crate) struct DdMatrix {
    pub n: usize,
    pub data: Vec<TwoFloat>,
}

impl DdMatrix {
    pub fn zeros(n: usize) -> Self {
        DdMatrix { n, data: vec![TwoFloat::from(0.0); n * n] }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> TwoFloat {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: TwoFloat) {
        self.data[i * self.n + j] = v;
    }

    pub fn norm1_f64(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.at(i, j).hi().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Cholesky factor `L` with `B = L Lᵀ`. Returns the failing pivot index when `B` is not
/// numerically positive definite.
pub(crate) fn cholesky(b: &DdMatrix) -> Result<DdMatrix, usize> {
    let n = b.n;
    let mut l = DdMatrix::zeros(n);
    for j in 0..n {
        let mut d = b.at(j, j);
        for k in 0..j {
            let ljk = l.at(j, k);
            d -= ljk * ljk;
        }
        if !(d.hi() > 0.0) {
            return Err(j);
        }
        let ljj = d.sqrt();
        l.set(j, j, ljj);
        let inv = dd_div(TwoFloat::from(1.0), ljj);
        for i in j + 1..n {
            let mut s = b.at(i, j);
            for k in 0..j {
                s -= l.at(i, k) * l.at(j, k);
            }
            l.set(i, j, s * inv);
        }
    }
    Ok(l)
}

/// `L⁻¹` for lower-triangular `L`, itself lower triangular.
pub(crate) fn lower_inverse(l: &DdMatrix) -> DdMatrix {
    let n = l.n;
    let mut w = DdMatrix::zeros(n);
    for j in 0..n {
        w.set(j, j, dd_div(TwoFloat::from(1.0), l.at(j, j)));
        for i in j + 1..n {
            let mut s = TwoFloat::from(0.0);
            for k in j..i {
                s += l.at(i, k) * w.at(k, j);
            }
            w.set(i, j, -dd_div(s, l.at(i, i)));
        }
    }
    w
}

/// `W S Wᵀ` for lower-triangular `W` and symmetric `S`, returned symmetric.
pub(crate) fn congruence(w: &DdMatrix, s: &DdMatrix) -> DdMatrix {
    let n = w.n;
    // t = W S
    let mut t = DdMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = TwoFloat::from(0.0);
            for k in 0..=i {
                acc += w.at(i, k) * s.at(k, j);
            }
            t.set(i, j, acc);
        }
    }
    let mut c = DdMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut acc = TwoFloat::from(0.0);
            for k in 0..=j {
                acc += t.at(i, k) * w.at(j, k);
            }
            c.set(i, j, acc);
            c.set(j, i, acc);
        }
    }
    c
}

/// `Wᵀ y` for lower-triangular `W`.
pub(crate) fn lower_transpose_mul(w: &DdMatrix, y: &[TwoFloat]) -> Vec<TwoFloat> {
    let n = w.n;
    (0..n)
        .map(|i| {
            let mut acc = TwoFloat::from(0.0);
            for (k, yk) in y.iter().enumerate().skip(i) {
                acc += w.at(k, i) * *yk;
            }
            acc
        })
        .collect()
}

pub(crate) fn sym_mul(s: &DdMatrix, x: &[TwoFloat]) -> Vec<TwoFloat> {
    (0..s.n)
        .map(|i| {
            let mut acc = TwoFloat::from(0.0);
            for (j, xj) in x.iter().enumerate() {
                acc += s.at(i, j) * *xj;
            }
            acc
        })
        .collect()
}

pub(crate) fn norm2(x: &[TwoFloat]) -> TwoFloat {
    let mut acc = TwoFloat::from(0.0);
    for v in x {
        acc += *v * *v;
    }
    acc.sqrt()
}
