//! Square matrices of jets: inverse, determinant, trace, exponential.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetContext};

/// Row-major square matrix of jets.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    pub n: usize,
    pub data: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Jet) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        JetMatrix { n, data }
    }

    pub fn identity(ctx: &JetContext, n: usize) -> Self {
        Self::from_fn(n, |i, j| ctx.constant(if i == j { 1.0 } else { 0.0 }))
    }

    pub fn at(&self, i: usize, j: usize) -> &Jet {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Jet) {
        self.data[i * self.n + j] = v;
    }

    pub fn matmul(&self, rhs: &JetMatrix) -> JetMatrix {
        assert_eq!(self.n, rhs.n);
        let n = self.n;
        let ctx = self.data[0].context().clone();
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ctx.zero();
                for k in 0..n {
                    acc = &acc + &(self.at(i, k) * rhs.at(k, j));
                }
                out.push(acc);
            }
        }
        JetMatrix { n, data: out }
    }

    pub fn add(&self, rhs: &JetMatrix) -> JetMatrix {
        assert_eq!(self.n, rhs.n);
        JetMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> JetMatrix {
        JetMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a.scale(s)).collect(),
        }
    }

    pub fn trace(&self) -> Jet {
        let mut acc = self.data[0].context().zero();
        for i in 0..self.n {
            acc = &acc + self.at(i, i);
        }
        acc
    }

    pub fn norm_inf(&self) -> f64 {
        self.data.iter().fold(0.0, |m, j| m.max(j.norm_inf()))
    }

    /// LU with partial pivoting on constant-term magnitude; returns (lu, perm sign).
    fn lu(&self) -> Result<(JetMatrix, f64)> {
        let n = self.n;
        let mut lu = self.clone();
        let mut sign = 1.0;
        for col in 0..n {
            let mut pivot = col;
            let mut best = lu.at(col, col).value().abs();
            for row in col + 1..n {
                let v = lu.at(row, col).value().abs();
                if v > best {
                    best = v;
                    pivot = row;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    lu.data.swap(col * n + j, pivot * n + j);
                }
                sign = -sign;
            }
            let d = lu.at(col, col).clone();
            for row in col + 1..n {
                let factor = lu.at(row, col).try_div(&d)?;
                for j in col + 1..n {
                    let v = lu.at(row, j) - &(&factor * lu.at(col, j));
                    lu.set(row, j, v);
                }
                lu.set(row, col, factor);
            }
        }
        Ok((lu, sign))
    }

    pub fn det(&self) -> Result<Jet> {
        let (lu, sign) = self.lu()?;
        let mut acc = lu.data[0].context().constant(sign);
        for i in 0..self.n {
            acc = &acc * lu.at(i, i);
        }
        Ok(acc)
    }

    /// Matrix inverse: solves m · inv = Id in jet arithmetic.
    pub fn inverse(&self) -> Result<JetMatrix> {
        let n = self.n;
        let ctx = self.data[0].context().clone();
        let (lu, _) = self.lu()?;
        // Recover the row permutation by replaying pivoting on constants.
        // Simpler: solve with full Gauss-Jordan instead of reusing lu.
        let _ = lu;
        let mut aug = self.clone();
        let mut inv = JetMatrix::identity(&ctx, n);
        for col in 0..n {
            let mut pivot = col;
            let mut best = aug.at(col, col).value().abs();
            for row in col + 1..n {
                let v = aug.at(row, col).value().abs();
                if v > best {
                    best = v;
                    pivot = row;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if pivot != col {
                for j in 0..n {
                    aug.data.swap(col * n + j, pivot * n + j);
                    inv.data.swap(col * n + j, pivot * n + j);
                }
            }
            let d = aug.at(col, col).try_recip()?;
            for j in 0..n {
                let v = aug.at(col, j) * &d;
                aug.set(col, j, v);
                let w = inv.at(col, j) * &d;
                inv.set(col, j, w);
            }
            for row in 0..n {
                if row == col {
                    continue;
                }
                let factor = aug.at(row, col).clone();
                if factor.norm_inf() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let v = aug.at(row, j) - &(&factor * aug.at(col, j));
                    aug.set(row, j, v);
                    let w = inv.at(row, j) - &(&factor * inv.at(col, j));
                    inv.set(row, j, w);
                }
            }
        }
        Ok(inv)
    }

    /// Matrix exponential by truncated series with scaling and squaring.
    ///
    /// When the constant part vanishes (e.g. `t · a` with `t` a seeded
    /// parameter) the series terminates exactly at the truncation order.
    pub fn expm(&self) -> JetMatrix {
        let ctx = self.data[0].context().clone();
        let n = self.n;
        let const_norm = self
            .data
            .iter()
            .fold(0.0f64, |m, j| m.max(j.value().abs()));
        let squarings = if const_norm > 0.5 {
            (const_norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(0.5f64.powi(squarings as i32));
        let mut sum = JetMatrix::identity(&ctx, n);
        let mut term = JetMatrix::identity(&ctx, n);
        let mut m = 1usize;
        loop {
            term = term.matmul(&scaled).scale(1.0 / m as f64);
            let tn = term.norm_inf();
            sum = sum.add(&term);
            m += 1;
            if tn < 1e-18 * (1.0 + sum.norm_inf()) || m > 60 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.matmul(&sum);
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn inverse_of_identity_plus_nilpotent() {
        // inverse(Id + h·N) = Id − hN + h²N² for nilpotent N at order 2.
        let ctx = JetContext::new(1, 2);
        let h = ctx.seed(0, 0.0).unwrap();
        let mut m = JetMatrix::identity(&ctx, 3);
        // N: strictly upper shift.
        m.set(0, 1, h.clone());
        m.set(1, 2, h.clone());
        let inv = m.inverse().unwrap();
        assert!((inv.at(0, 1).coeff(&[1]) + 1.0).abs() < 1e-14);
        assert!((inv.at(1, 2).coeff(&[1]) + 1.0).abs() < 1e-14);
        assert!((inv.at(0, 2).coeff(&[2]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn det_of_diagonal_is_product() {
        let ctx = JetContext::new(2, 2);
        let x = ctx.seed(0, 2.0).unwrap();
        let y = ctx.seed(1, 3.0).unwrap();
        let mut m = JetMatrix::identity(&ctx, 2);
        m.set(0, 0, x.clone());
        m.set(1, 1, y.clone());
        let d = m.det().unwrap();
        let p = &x * &y;
        for (a, b) in d.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_residual_random() {
        let ctx = JetContext::new(2, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let m = JetMatrix::from_fn(4, |i, j| {
                let mut coeffs: Vec<f64> = (0..ctx.num_coeffs())
                    .map(|_| rng.gen_range(-1.0..1.0))
                    .collect();
                if i == j {
                    coeffs[0] += 3.0; // diagonally dominant
                }
                ctx.from_coeffs(coeffs)
            });
            let inv = m.inverse().unwrap();
            let prod = m.matmul(&inv);
            let id = JetMatrix::identity(&ctx, 4);
            let mut resid = 0.0f64;
            for (a, b) in prod.data.iter().zip(&id.data) {
                for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                    resid = resid.max((x - y).abs());
                }
            }
            assert!(resid <= 1e-11, "residual {}", resid);
        }
    }

    #[test]
    fn expm_inverse_pair() {
        // expm(t·a) · expm(−t·a) = Id to roundoff for a random 4×4 a.
        let ctx = JetContext::new(1, 3);
        let t = ctx.seed(0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let ta = JetMatrix::from_fn(4, |i, j| t.scale(a[i * 4 + j]));
        let e = ta.expm();
        let einv = ta.scale(-1.0).expm();
        let prod = e.matmul(&einv);
        let id = JetMatrix::identity(&ctx, 4);
        for (a, b) in prod.data.iter().zip(&id.data) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn expm_matches_truncated_series() {
        // With zero constant part the series terminates at the order: compare
        // against Id + M + M²/2 + M³/6 assembled by direct multiplication.
        let ctx = JetContext::new(1, 3);
        let t = ctx.seed(0, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a: Vec<f64> = (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let m = JetMatrix::from_fn(4, |i, j| t.scale(a[i * 4 + j]));
        let direct = {
            let id = JetMatrix::identity(&ctx, 4);
            let m2 = m.matmul(&m);
            let m3 = m2.matmul(&m);
            id.add(&m).add(&m2.scale(0.5)).add(&m3.scale(1.0 / 6.0))
        };
        let e = m.expm();
        for (a, b) in e.data.iter().zip(&direct.data) {
            for (x, y) in a.coeffs().iter().zip(b.coeffs()) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn singular_constant_matrix_rejected() {
        let ctx = JetContext::new(1, 2);
        let h = ctx.seed(0, 0.0).unwrap();
        let m = JetMatrix::from_fn(2, |_, _| h.clone());
        assert!(m.inverse().is_err());
        assert!(matches!(m.det().map(|d| d.value()), Ok(v) if v == 0.0) || m.det().is_err());
    }
}
