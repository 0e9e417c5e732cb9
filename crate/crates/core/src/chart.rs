//! Coordinate charts: a box with periodicity flags plus jet-evaluable field
//! definitions for ω, J, torus generators and their potentials.
//!
//! A chart covers the model manifold up to a measure-zero set (coordinate
//! singularities of angle parametrizations sit on the box boundary); sample
//! points are drawn from the open interior and quadrature uses midpoint grids
//! that avoid the singular loci.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Jet, JetContext};
use crate::jet_matrix::JetMatrix;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub periodic: bool,
}

impl Axis {
    pub fn width(&self) -> f64 {
        self.max - self.min
    }
}

/// Named deformation parameter with its base value.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChartParam {
    pub name: String,
    pub base: f64,
}

/// Conjugated complex structure: J = exp(−t·a) · J_base · exp(t·a), with the
/// endomorphism field `a` given componentwise and optionally projected onto
/// sp(TM, ω) before use.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Conjugation {
    pub a: Vec<Vec<Expr>>,
    pub t: Expr,
    pub sp_project: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chart {
    pub name: String,
    pub dim: usize,
    #[serde(rename = "box")]
    pub axes: Vec<Axis>,
    /// ω_ab componentwise (validated antisymmetric at sample points).
    pub omega: Vec<Vec<Expr>>,
    /// J^a_b componentwise, row = upper index.
    pub j: Vec<Vec<Expr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_conjugation: Option<Conjugation>,
    /// Commuting vector fields k_i, componentwise.
    #[serde(default)]
    pub generators: Vec<Vec<Expr>>,
    /// Twisted-Hamiltonian potentials h_i, paired with the generators.
    #[serde(default)]
    pub potentials: Vec<Option<Expr>>,
    /// Coefficients c_i with V = Σ c_i k_i.
    #[serde(default)]
    pub lee_coefficients: Vec<f64>,
    #[serde(default)]
    pub params: Vec<ChartParam>,
}

impl Chart {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidChart {
                chart: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        if self.dim < 4 || self.dim % 2 != 0 {
            return fail("dim must be an even integer >= 4");
        }
        if self.axes.len() != self.dim {
            return fail("box must have one axis per coordinate");
        }
        if self.axes.iter().any(|a| !(a.width() > 0.0)) {
            return fail("every axis needs max > min");
        }
        if self.omega.len() != self.dim || self.omega.iter().any(|r| r.len() != self.dim) {
            return fail("omega must be a dim x dim component matrix");
        }
        if self.j.len() != self.dim || self.j.iter().any(|r| r.len() != self.dim) {
            return fail("j must be a dim x dim component matrix");
        }
        if let Some(conj) = &self.j_conjugation {
            if conj.a.len() != self.dim || conj.a.iter().any(|r| r.len() != self.dim) {
                return fail("j_conjugation.a must be a dim x dim component matrix");
            }
        }
        if self.generators.iter().any(|g| g.len() != self.dim) {
            return fail("every generator needs dim components");
        }
        if !self.potentials.is_empty() && self.potentials.len() != self.generators.len() {
            return fail("potentials must pair with generators");
        }
        if !self.lee_coefficients.is_empty()
            && self.lee_coefficients.len() != self.generators.len()
        {
            return fail("lee_coefficients must pair with generators");
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    /// Jet context covering the coordinates plus all chart parameters.
    pub fn context(&self, order: usize) -> JetContext {
        JetContext::new(self.dim + self.num_params(), order)
    }

    /// Wrap periodic coordinates into the box and check the rest.
    pub fn normalize_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::PointOutsideBox { point: x.to_vec() });
        }
        let mut out = Vec::with_capacity(self.dim);
        for (xi, axis) in x.iter().zip(&self.axes) {
            if axis.periodic {
                let w = axis.width();
                let mut v = (xi - axis.min).rem_euclid(w) + axis.min;
                if v >= axis.max {
                    v -= w;
                }
                out.push(v);
            } else {
                if !(*xi > axis.min && *xi < axis.max) {
                    return Err(Error::PointOutsideBox { point: x.to_vec() });
                }
                out.push(*xi);
            }
        }
        Ok(out)
    }

    /// Seed jets for the coordinates and parameters at a point. Parameter
    /// seeds default to the declared base values.
    pub fn seed_vars(&self, ctx: &JetContext, x: &[f64], params: Option<&[f64]>) -> Result<Vec<Jet>> {
        let x = self.normalize_point(x)?;
        let mut vars = Vec::with_capacity(self.dim + self.num_params());
        for (i, xi) in x.iter().enumerate() {
            vars.push(ctx.seed(i, *xi)?);
        }
        for (k, p) in self.params.iter().enumerate() {
            let value = params.map(|ps| ps[k]).unwrap_or(p.base);
            vars.push(ctx.seed(self.dim + k, value)?);
        }
        Ok(vars)
    }

    pub fn eval_matrix(&self, exprs: &[Vec<Expr>], ctx: &JetContext, vars: &[Jet]) -> Result<JetMatrix> {
        let n = self.dim;
        let mut data = Vec::with_capacity(n * n);
        for row in exprs {
            for e in row {
                data.push(e.eval(ctx, vars)?);
            }
        }
        Ok(JetMatrix { n, data })
    }

    /// J^a_b at the seeded variables, applying any declared conjugation.
    pub fn eval_j(&self, ctx: &JetContext, vars: &[Jet]) -> Result<JetMatrix> {
        let base = self.eval_matrix(&self.j, ctx, vars)?;
        match &self.j_conjugation {
            None => Ok(base),
            Some(conj) => {
                let mut a = self.eval_matrix(&conj.a, ctx, vars)?;
                if conj.sp_project {
                    let omega = self.eval_matrix(&self.omega, ctx, vars)?;
                    a = sp_project(&a, &omega)?;
                }
                let t = conj.t.eval(ctx, vars)?;
                let ta = JetMatrix::from_fn(self.dim, |i, j| &t * a.at(i, j));
                let e_neg = ta.scale(-1.0).expm();
                let e_pos = ta.expm();
                Ok(e_neg.matmul(&base).matmul(&e_pos))
            }
        }
    }

    /// Uniform sample in the open interior; non-periodic axes keep a 10%
    /// margin away from singular boundary loci.
    pub fn sample_point(&self, rng: &mut impl Rng) -> Vec<f64> {
        self.axes
            .iter()
            .map(|a| {
                let u: f64 = rng.gen();
                if a.periodic {
                    a.min + u * a.width()
                } else {
                    a.min + (0.1 + 0.8 * u) * a.width()
                }
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Chart> {
        let chart: Chart = serde_json::from_str(s)?;
        chart.validate()?;
        Ok(chart)
    }
}

/// Project an endomorphism onto sp(TM, ω): a ↦ ½(a − ω⁻¹ aᵀ ω).
pub fn sp_project(a: &JetMatrix, omega: &JetMatrix) -> Result<JetMatrix> {
    let n = a.n;
    let omega_inv = omega.inverse()?;
    let at = JetMatrix::from_fn(n, |i, j| a.at(j, i).clone());
    let m = omega_inv.matmul(&at).matmul(omega);
    Ok(a.add(&m.scale(-1.0)).scale(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{c, x};

    fn toy_chart() -> Chart {
        let zero = || c(0.0);
        let one = || c(1.0);
        Chart {
            name: "toy".into(),
            dim: 4,
            axes: vec![
                Axis { min: 0.0, max: 1.0, periodic: true },
                Axis { min: 0.0, max: 2.0, periodic: false },
                Axis { min: 0.0, max: 1.0, periodic: true },
                Axis { min: 0.0, max: 1.0, periodic: true },
            ],
            omega: vec![
                vec![zero(), one(), zero(), zero()],
                vec![c(-1.0), zero(), zero(), zero()],
                vec![zero(), zero(), zero(), one()],
                vec![zero(), zero(), c(-1.0), zero()],
            ],
            j: vec![
                vec![zero(), c(-1.0), zero(), zero()],
                vec![one(), zero(), zero(), zero()],
                vec![zero(), zero(), zero(), c(-1.0)],
                vec![zero(), zero(), one(), zero()],
            ],
            j_conjugation: None,
            generators: vec![],
            potentials: vec![],
            lee_coefficients: vec![],
            params: vec![],
        }
    }

    #[test]
    fn normalize_wraps_periodic_axes() {
        let chart = toy_chart();
        let p = chart.normalize_point(&[1.25, 0.5, -0.25, 0.0]).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-15);
        assert!((p[2] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn normalize_rejects_outside_open_interval() {
        let chart = toy_chart();
        assert!(chart.normalize_point(&[0.0, 2.0, 0.0, 0.0]).is_err());
        assert!(chart.normalize_point(&[0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn chart_json_roundtrip() {
        let chart = toy_chart();
        let s = chart.to_json().unwrap();
        let back = Chart::from_json(&s).unwrap();
        assert_eq!(back.dim, 4);
        assert_eq!(back.axes.len(), 4);
        let ctx = back.context(1);
        let vars = back.seed_vars(&ctx, &[0.1, 0.5, 0.2, 0.3], None).unwrap();
        let j0 = back.eval_j(&ctx, &vars).unwrap();
        assert_eq!(j0.at(1, 0).value(), 1.0);
    }

    #[test]
    fn sp_projection_lands_in_sp() {
        // After projection, ω·a is symmetric.
        let ctx = JetContext::new(1, 1);
        let omega = {
            let mut m = JetMatrix::from_fn(4, |_, _| ctx.constant(0.0));
            m.set(0, 1, ctx.constant(1.0));
            m.set(1, 0, ctx.constant(-1.0));
            m.set(2, 3, ctx.constant(1.0));
            m.set(3, 2, ctx.constant(-1.0));
            m
        };
        let a = JetMatrix::from_fn(4, |i, j| ctx.constant(((i * 7 + j * 3) % 5) as f64 - 2.0));
        let p = sp_project(&a, &omega).unwrap();
        let s = omega.matmul(&p);
        for i in 0..4 {
            for j in 0..4 {
                let d = s.at(i, j) - s.at(j, i);
                assert!(d.norm_inf() < 1e-13);
            }
        }
    }
}
