//! Truncated multivariate Taylor arithmetic (jets).
//!
//! A [`Jet`] stores the Taylor coefficients of a scalar quantity at a base
//! point, for all multi-indices of total degree ≤ the context order. All
//! arithmetic is exact truncated polynomial algebra, so every coefficient of
//! degree d is the exact d-th partial derivative of the represented quantity
//! (divided by the factorials) up to floating-point roundoff. Jets are the
//! derivative substrate for every geometric operator in this crate.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};

/// Multiplication and differentiation tables for one (num_vars, order) pair.
struct CtxTables {
    num_vars: usize,
    order: usize,
    /// Exponent vector of each coefficient slot, graded-lexicographic.
    exponents: Vec<Vec<u8>>,
    /// Slot of each exponent vector.
    index_of: HashMap<Vec<u8>, u32>,
    /// Flattened (lhs, rhs, dst) triples for the truncated Cauchy product.
    mul_triples: Vec<(u32, u32, u32)>,
    /// Per variable: (src, dst, factor) with coeff_dst += coeff_src * factor.
    deriv: Vec<Vec<(u32, u32, f64)>>,
}

fn enumerate_exponents(num_vars: usize, order: usize) -> Vec<Vec<u8>> {
    fn rec(vars_left: usize, deg_left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if vars_left == 0 {
            out.push(prefix.clone());
            return;
        }
        for d in 0..=deg_left {
            prefix.push(d as u8);
            rec(vars_left - 1, deg_left - d, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for total in 0..=order {
        // Exponent vectors of exact total degree, lexicographic within a grade.
        let mut grade = Vec::new();
        rec(num_vars, total, &mut Vec::new(), &mut grade);
        grade.retain(|e| e.iter().map(|&x| x as usize).sum::<usize>() == total);
        grade.sort();
        out.extend(grade);
    }
    out
}

impl CtxTables {
    fn build(num_vars: usize, order: usize) -> Self {
        let exponents = enumerate_exponents(num_vars, order);
        let mut index_of = HashMap::new();
        for (i, e) in exponents.iter().enumerate() {
            index_of.insert(e.clone(), i as u32);
        }
        let deg = |e: &[u8]| e.iter().map(|&x| x as usize).sum::<usize>();

        let mut mul_triples = Vec::new();
        for (i, ei) in exponents.iter().enumerate() {
            for (j, ej) in exponents.iter().enumerate() {
                if deg(ei) + deg(ej) > order {
                    continue;
                }
                let sum: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                let k = index_of[&sum];
                mul_triples.push((i as u32, j as u32, k));
            }
        }
        mul_triples.sort_by_key(|t| t.2);

        let mut deriv = Vec::new();
        for v in 0..num_vars {
            let mut list = Vec::new();
            for (i, e) in exponents.iter().enumerate() {
                if e[v] >= 1 {
                    let mut lower = e.clone();
                    lower[v] -= 1;
                    list.push((i as u32, index_of[&lower], e[v] as f64));
                }
            }
            deriv.push(list);
        }

        CtxTables {
            num_vars,
            order,
            exponents,
            index_of,
            mul_triples,
            deriv,
        }
    }
}

fn tables(num_vars: usize, order: usize) -> Arc<CtxTables> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<CtxTables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(t) = cache.read().unwrap().get(&(num_vars, order)) {
        return t.clone();
    }
    let t = Arc::new(CtxTables::build(num_vars, order));
    cache
        .write()
        .unwrap()
        .entry((num_vars, order))
        .or_insert(t)
        .clone()
}

/// Differentiation context: number of active variables and truncation order.
///
/// Order must be ≥ 2 before curvature is evaluated downstream, and ≥ 3 when
/// derivatives of curvature-level quantities are extracted.
#[derive(Clone)]
pub struct JetContext {
    tables: Arc<CtxTables>,
}

impl JetContext {
    pub fn new(num_vars: usize, order: usize) -> Self {
        assert!(order >= 1, "jet order must be at least 1");
        assert!(num_vars >= 1, "jet context needs at least one variable");
        JetContext {
            tables: tables(num_vars, order),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.tables.num_vars
    }

    pub fn order(&self) -> usize {
        self.tables.order
    }

    pub fn num_coeffs(&self) -> usize {
        self.tables.exponents.len()
    }

    pub fn same_as(&self, other: &JetContext) -> bool {
        self.num_vars() == other.num_vars() && self.order() == other.order()
    }

    /// Jet with all coefficients zero.
    pub fn zero(&self) -> Jet {
        Jet {
            ctx: self.clone(),
            coeffs: vec![0.0; self.num_coeffs()],
        }
    }

    /// Jet of a constant.
    pub fn constant(&self, value: f64) -> Jet {
        let mut j = self.zero();
        j.coeffs[0] = value;
        j
    }

    /// Jet with explicitly given coefficients (graded-lexicographic order).
    pub fn from_coeffs(&self, coeffs: Vec<f64>) -> Jet {
        assert_eq!(coeffs.len(), self.num_coeffs());
        Jet {
            ctx: self.clone(),
            coeffs,
        }
    }

    /// Jet of the coordinate function `x ↦ value + (x_var − base_var)`.
    pub fn seed(&self, var_index: usize, value: f64) -> Result<Jet> {
        if var_index >= self.num_vars() {
            return Err(Error::InvalidVariable {
                index: var_index,
                num_vars: self.num_vars(),
            });
        }
        let mut j = self.constant(value);
        let mut e = vec![0u8; self.num_vars()];
        e[var_index] = 1;
        let idx = self.tables.index_of[&e] as usize;
        j.coeffs[idx] = 1.0;
        Ok(j)
    }

    fn slot(&self, exponents: &[u8]) -> Option<usize> {
        self.tables.index_of.get(exponents).map(|&i| i as usize)
    }
}

impl std::fmt::Debug for JetContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "JetContext({} vars, order {})",
            self.num_vars(),
            self.order()
        )
    }
}

/// Truncated multivariate Taylor expansion of a scalar at a point.
#[derive(Clone)]
pub struct Jet {
    ctx: JetContext,
    coeffs: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet(value {}, {:?})", self.value(), self.ctx)
    }
}

impl Jet {
    pub fn context(&self) -> &JetContext {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Value at the base point (degree-0 coefficient).
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient for the given exponent vector, or 0 if absent.
    pub fn coeff(&self, exponents: &[u8]) -> f64 {
        match self.ctx.slot(exponents) {
            Some(i) => self.coeffs[i],
            None => 0.0,
        }
    }

    /// First-order coefficient of a variable: the partial derivative ∂_v.
    pub fn deriv(&self, var: usize) -> f64 {
        let mut e = vec![0u8; self.ctx.num_vars()];
        e[var] = 1;
        self.coeff(&e)
    }

    /// Largest |coefficient|.
    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn assert_same_ctx(&self, other: &Jet) {
        assert!(
            self.ctx.same_as(&other.ctx),
            "jet context mismatch: {:?} vs {:?}",
            self.ctx,
            other.ctx
        );
    }

    /// Partial derivative as a jet in the same context.
    ///
    /// The result's top-degree coefficients are not recoverable from a
    /// truncated expansion and are left at zero; coefficients of degree
    /// < order are exact.
    pub fn partial(&self, var: usize) -> Jet {
        let mut out = self.ctx.zero();
        for &(src, dst, factor) in &self.ctx.tables.deriv[var] {
            out.coeffs[dst as usize] += self.coeffs[src as usize] * factor;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    fn mul_impl(&self, other: &Jet) -> Jet {
        self.assert_same_ctx(other);
        let mut out = self.ctx.zero();
        for &(i, j, k) in &self.ctx.tables.mul_triples {
            out.coeffs[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        out
    }

    /// Truncated reciprocal. Fails when the constant term vanishes.
    pub fn try_recip(&self) -> Result<Jet> {
        let c = self.value();
        if c == 0.0 {
            return Err(Error::DivisionByZero);
        }
        // 1/(c + z) = Σ_m (−1)^m z^m / c^{m+1}, z nilpotent after truncation.
        let order = self.ctx.order();
        let mut z = self.clone();
        z.coeffs[0] = 0.0;
        let mut out = self.ctx.constant(1.0 / c);
        let mut zp = self.ctx.constant(1.0);
        let mut sign = 1.0;
        let mut cp = 1.0 / c;
        for _ in 1..=order {
            zp = zp.mul_impl(&z);
            sign = -sign;
            cp /= c;
            out = &out + &zp.scale(sign * cp);
        }
        Ok(out)
    }

    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_impl(&other.try_recip()?))
    }

    /// Composition with a univariate series: Σ_m f_m (self − self.value())^m.
    ///
    /// `series[m]` must hold f^{(m)}(c)/m! about c = constant term.
    fn compose(&self, series: &[f64]) -> Jet {
        let mut z = self.clone();
        z.coeffs[0] = 0.0;
        // Horner over the nilpotent part.
        let mut out = self.ctx.constant(series[series.len() - 1]);
        for m in (0..series.len() - 1).rev() {
            out = out.mul_impl(&z);
            out.coeffs[0] += series[m];
        }
        out
    }

    pub fn exp(&self) -> Jet {
        let c = self.value();
        let p = self.ctx.order();
        let mut series = vec![0.0; p + 1];
        let ec = c.exp();
        let mut fact = 1.0;
        for (m, s) in series.iter_mut().enumerate() {
            if m > 0 {
                fact *= m as f64;
            }
            *s = ec / fact;
        }
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        let c = self.value();
        if c <= 0.0 {
            return Err(Error::Domain {
                func: "log",
                value: c,
            });
        }
        let p = self.ctx.order();
        let mut series = vec![0.0; p + 1];
        series[0] = c.ln();
        let mut cm = 1.0;
        for (m, s) in series.iter_mut().enumerate().skip(1) {
            cm *= c;
            *s = if m % 2 == 1 { 1.0 } else { -1.0 } / (m as f64 * cm);
        }
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        let c = self.value();
        if c <= 0.0 {
            return Err(Error::Domain {
                func: "sqrt",
                value: c,
            });
        }
        self.powf(0.5)
    }

    /// Real power about a positive constant term.
    pub fn powf(&self, alpha: f64) -> Result<Jet> {
        let c = self.value();
        if c <= 0.0 {
            return Err(Error::Domain {
                func: "pow",
                value: c,
            });
        }
        let p = self.ctx.order();
        let mut series = vec![0.0; p + 1];
        let ca = c.powf(alpha);
        let mut binom = 1.0;
        let mut cm = 1.0;
        for (m, s) in series.iter_mut().enumerate() {
            if m > 0 {
                binom *= (alpha - (m as f64 - 1.0)) / m as f64;
                cm *= c;
            }
            *s = ca * binom / cm;
        }
        Ok(self.compose(&series))
    }

    pub fn sin(&self) -> Jet {
        self.trig(true)
    }

    pub fn cos(&self) -> Jet {
        self.trig(false)
    }

    fn trig(&self, sine: bool) -> Jet {
        let c = self.value();
        let p = self.ctx.order();
        let (s, co) = c.sin_cos();
        // Derivative cycle for sin: sin, cos, −sin, −cos.
        let cycle = if sine {
            [s, co, -s, -co]
        } else {
            [co, -s, -co, s]
        };
        let mut series = vec![0.0; p + 1];
        let mut fact = 1.0;
        for (m, slot) in series.iter_mut().enumerate() {
            if m > 0 {
                fact *= m as f64;
            }
            *slot = cycle[m % 4] / fact;
        }
        self.compose(&series)
    }

    pub fn atan(&self) -> Jet {
        let c = self.value();
        let p = self.ctx.order();
        // Coefficients d_k of 1/(1+t²) about c from
        // (1 + c² + 2c x + x²) Σ d_k x^k = 1, then integrate termwise.
        let mut d = vec![0.0; p.max(1)];
        let q = 1.0 + c * c;
        d[0] = 1.0 / q;
        for k in 1..d.len() {
            let prev2 = if k >= 2 { d[k - 2] } else { 0.0 };
            d[k] = -(2.0 * c * d[k - 1] + prev2) / q;
        }
        let mut series = vec![0.0; p + 1];
        series[0] = c.atan();
        for m in 1..=p {
            series[m] = d[m - 1] / m as f64;
        }
        self.compose(&series)
    }

    /// Two-argument arctangent; branch chosen by the larger constant term.
    pub fn atan2(y: &Jet, x: &Jet) -> Result<Jet> {
        y.assert_same_ctx(x);
        let (y0, x0) = (y.value(), x.value());
        if y0 == 0.0 && x0 == 0.0 {
            return Err(Error::Domain {
                func: "atan2",
                value: 0.0,
            });
        }
        let base = y0.atan2(x0);
        if x0.abs() >= y0.abs() {
            let ratio = y.try_div(x)?;
            let t = ratio.atan();
            let offset = base - (y0 / x0).atan();
            Ok(&t + &y.ctx.constant(offset))
        } else {
            let ratio = x.try_div(y)?;
            let t = ratio.atan();
            let offset = base + (x0 / y0).atan();
            Ok(&t.scale(-1.0) + &y.ctx.constant(offset))
        }
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                self.assert_same_ctx(rhs);
                let mut out = self.clone();
                for (c, r) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
                    *c = *c $op *r;
                }
                out
            }
        }
    };
}

impl_binop!(Add, add, +);
impl_binop!(Sub, sub, -);

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.mul_impl(rhs)
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self.try_div(rhs)
            .expect("division by jet with zero constant term")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctx(nv: usize, p: usize) -> JetContext {
        JetContext::new(nv, p)
    }

    #[test]
    fn seed_is_coordinate_function() {
        let c = ctx(1, 2);
        let x = c.seed(0, 2.0).unwrap();
        assert_eq!(x.coeffs(), &[2.0, 1.0, 0.0]);
    }

    #[test]
    fn seed_second_variable_order_one() {
        let c = ctx(2, 1);
        let x = c.seed(1, 0.0).unwrap();
        assert_eq!(x.value(), 0.0);
        assert_eq!(x.deriv(1), 1.0);
        assert_eq!(x.deriv(0), 0.0);
    }

    #[test]
    fn seed_rejects_bad_index() {
        let c = ctx(2, 1);
        assert!(c.seed(2, 0.0).is_err());
    }

    #[test]
    fn square_of_seed_expansion() {
        // (3 + h)² = 9 + 6h + h²
        let c = ctx(1, 2);
        let x = c.seed(0, 3.0).unwrap();
        let sq = &x * &x;
        assert_relative_eq!(sq.value(), 9.0);
        assert_relative_eq!(sq.coeff(&[1]), 6.0);
        assert_relative_eq!(sq.coeff(&[2]), 1.0);
    }

    #[test]
    fn product_one_plus_h_one_minus_h() {
        let c = ctx(1, 2);
        let h = c.seed(0, 0.0).unwrap();
        let a = &c.constant(1.0) + &h;
        let b = &c.constant(1.0) - &h;
        let p = &a * &b;
        assert_relative_eq!(p.value(), 1.0);
        assert_relative_eq!(p.coeff(&[1]), 0.0);
        assert_relative_eq!(p.coeff(&[2]), -1.0);
    }

    #[test]
    fn geometric_series_reciprocal() {
        // 1/(1 + h) = 1 − h + h²
        let c = ctx(1, 2);
        let h = c.seed(0, 0.0).unwrap();
        let r = c.constant(1.0).try_div(&(&c.constant(1.0) + &h)).unwrap();
        assert_relative_eq!(r.value(), 1.0);
        assert_relative_eq!(r.coeff(&[1]), -1.0);
        assert_relative_eq!(r.coeff(&[2]), 1.0);
    }

    #[test]
    fn second_derivative_of_square() {
        // ∂² of x·x at x = 5 is 2; degree-2 coefficient is 1 = 2/2!.
        let c = ctx(1, 2);
        let x = c.seed(0, 5.0).unwrap();
        let sq = &x * &x;
        assert_relative_eq!(2.0 * sq.coeff(&[2]), 2.0);
    }

    #[test]
    fn division_by_zero_constant_fails() {
        let c = ctx(1, 2);
        let z = c.seed(0, 0.0).unwrap();
        assert!(c.constant(1.0).try_div(&z).is_err());
    }

    #[test]
    fn exp_series_order_three() {
        let c = ctx(1, 3);
        let h = c.seed(0, 0.0).unwrap();
        let e = h.exp();
        assert_relative_eq!(e.value(), 1.0);
        assert_relative_eq!(e.coeff(&[1]), 1.0);
        assert_relative_eq!(e.coeff(&[2]), 0.5);
        assert_relative_eq!(e.coeff(&[3]), 1.0 / 6.0);
    }

    #[test]
    fn log_exp_roundtrip() {
        let c = ctx(2, 3);
        let x = c.seed(0, 0.7).unwrap();
        let y = c.seed(1, -0.3).unwrap();
        let f = &(&x * &y) + &x;
        let back = f.exp().ln().unwrap();
        for (a, b) in back.coeffs().iter().zip(f.coeffs()) {
            assert_relative_eq!(a, b, epsilon = 1e-13);
        }
    }

    #[test]
    fn sqrt_derivative_at_four() {
        let c = ctx(1, 2);
        let x = c.seed(0, 4.0).unwrap();
        let s = x.sqrt().unwrap();
        assert_relative_eq!(s.value(), 2.0);
        assert_relative_eq!(s.deriv(0), 0.25, epsilon = 1e-14);
    }

    #[test]
    fn log_rejects_nonpositive() {
        let c = ctx(1, 2);
        assert!(c.constant(-1.0).ln().is_err());
        assert!(c.constant(0.0).sqrt().is_err());
    }

    #[test]
    fn atan2_matches_gradient() {
        // ∂ atan2(y, x) = (x dy − y dx)/(x² + y²), checked on both branches.
        for (y0, x0) in [(0.3, 1.1), (1.4, 0.2), (-1.2, 0.4), (0.5, -1.3)] {
            let c = ctx(2, 2);
            let x = c.seed(0, x0).unwrap();
            let y = c.seed(1, y0).unwrap();
            let a = Jet::atan2(&y, &x).unwrap();
            let r2 = x0 * x0 + y0 * y0;
            assert_relative_eq!(a.value(), y0.atan2(x0), epsilon = 1e-14);
            assert_relative_eq!(a.deriv(0), -y0 / r2, epsilon = 1e-13);
            assert_relative_eq!(a.deriv(1), x0 / r2, epsilon = 1e-13);
        }
    }

    #[test]
    fn partial_shifts_coefficients() {
        let c = ctx(2, 3);
        let x = c.seed(0, 1.5).unwrap();
        let y = c.seed(1, -2.0).unwrap();
        let f = &(&x * &(&x * &y)) + &y; // x²y + y
        let fx = f.partial(0); // 2xy
        assert_relative_eq!(fx.value(), 2.0 * 1.5 * -2.0, epsilon = 1e-13);
        assert_relative_eq!(fx.deriv(0), 2.0 * -2.0, epsilon = 1e-13);
        assert_relative_eq!(fx.deriv(1), 2.0 * 1.5, epsilon = 1e-13);
    }

    proptest::proptest! {
        /// Product rule holds coefficient-wise: ∂(fg) = f'g + fg'.
        #[test]
        fn product_rule(coeffs_f in proptest::collection::vec(-2.0..2.0f64, 10),
                        coeffs_g in proptest::collection::vec(-2.0..2.0f64, 10)) {
            let c = ctx(2, 2);
            let mut f = c.zero();
            let mut g = c.zero();
            for (i, (a, b)) in coeffs_f.iter().zip(&coeffs_g).enumerate().take(c.num_coeffs()) {
                f.coeffs[i] = *a;
                g.coeffs[i] = *b;
            }
            for var in 0..2 {
                let lhs = (&f * &g).partial(var);
                let rhs = &(&f.partial(var) * &g) + &(&f * &g.partial(var));
                // Top-degree coefficients of a partial are truncated away; compare below.
                for (e, (l, r)) in c.tables.exponents.iter().zip(lhs.coeffs().iter().zip(rhs.coeffs())) {
                    let deg: usize = e.iter().map(|&x| x as usize).sum();
                    if deg < c.order() {
                        proptest::prop_assert!((l - r).abs() <= 1e-13 * (1.0 + l.abs().max(r.abs())));
                    }
                }
            }
        }

        /// Jet coefficients of polynomials match analytic Taylor coefficients.
        #[test]
        fn polynomial_taylor(a in -2.0..2.0f64, b in -2.0..2.0f64, c3 in -2.0..2.0f64, x0 in -1.5..1.5f64) {
            let c = ctx(1, 3);
            let x = c.seed(0, x0).unwrap();
            // p(x) = a x³ + b x² + c3 x
            let p = &(&(&(&x * &x) * &x).scale(a) + &(&x * &x).scale(b)) + &x.scale(c3);
            let val = a * x0.powi(3) + b * x0.powi(2) + c3 * x0;
            let d1 = 3.0 * a * x0.powi(2) + 2.0 * b * x0 + c3;
            let d2 = 6.0 * a * x0 + 2.0 * b;
            let d3 = 6.0 * a;
            proptest::prop_assert!((p.value() - val).abs() <= 1e-12 * (1.0 + val.abs()));
            proptest::prop_assert!((p.coeff(&[1]) - d1).abs() <= 1e-12 * (1.0 + d1.abs()));
            proptest::prop_assert!((p.coeff(&[2]) - d2 / 2.0).abs() <= 1e-12 * (1.0 + d2.abs()));
            proptest::prop_assert!((p.coeff(&[3]) - d3 / 6.0).abs() <= 1e-12 * (1.0 + d3.abs()));
        }
    }
}
