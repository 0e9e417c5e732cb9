//! Field evaluation at a chart point: ω, J, the metric g = ω(·, J·) and its
//! inverse, musical isomorphisms, Lee-form extraction, the Nijenhuis tensor
//! and the symplectic volume density.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::jet::{Jet, JetContext};
use crate::jet_matrix::JetMatrix;
use crate::tensor::{Down, TensorValue, Up, Variance};

/// Default tolerance for structural validity checks (compatibility, J² = −Id).
pub const STRUCTURE_TOL: f64 = 1e-8;

/// Certified Lee form at a point.
///
/// θ minimizes ‖dω − θ∧ω‖² over covectors; on a locally conformally
/// symplectic chart the defect vanishes and dθ = 0. Both defects are reported
/// so a failing chart is diagnosed rather than silently accepted: in
/// dimension four the wedge system is square and always solvable, and
/// non-lcs charts reveal themselves only through dθ ≠ 0.
#[derive(Clone, Debug)]
pub struct LeeForm {
    pub theta: TensorValue,
    /// Combined lcs defect: max of the scaled wedge and closedness residuals.
    pub residual: f64,
    pub wedge_residual: f64,
    pub dtheta_residual: f64,
    /// Smallest/largest eigenvalue ratio of the least-squares normal matrix.
    pub condition: f64,
}

/// All base fields evaluated at one chart point, sharing one jet context.
#[derive(Clone, Debug)]
pub struct PointBundle {
    pub ctx: JetContext,
    pub dim: usize,
    pub x: Vec<f64>,
    /// ω_ab.
    pub omega: TensorValue,
    /// ω^ab with ω^ab ω_bc = δ^a_c.
    pub omega_inv: TensorValue,
    /// J^a_b.
    pub j: TensorValue,
    /// g_ab = ω_ac J^c_b.
    pub g: TensorValue,
    /// g^ab.
    pub g_inv: TensorValue,
    /// max |ω(J·,J·) − ω| at the point.
    pub compat_residual: f64,
    /// max |J² + Id| at the point.
    pub j_squared_residual: f64,
}

fn tensor_from_matrix(m: &JetMatrix, sig: [Variance; 2]) -> TensorValue {
    let ctx = m.data[0].context().clone();
    TensorValue::from_fn(&ctx, m.n, &sig, |idx| m.at(idx[0], idx[1]).clone())
}

fn matrix_from_tensor(t: &TensorValue) -> JetMatrix {
    JetMatrix::from_fn(t.dim(), |i, j| t.get(&[i, j]).clone())
}

impl PointBundle {
    /// Evaluate ω, J and the induced metric at `x`, validating nondegeneracy,
    /// J² = −Id and ω(J·, J·) = ω with g positive definite.
    pub fn eval(chart: &Chart, x: &[f64], order: usize) -> Result<PointBundle> {
        let ctx = chart.context(order);
        Self::eval_in_ctx(chart, x, &ctx, None)
    }

    /// Evaluate with an explicit context (used when extra differentiation
    /// variables such as a deformation parameter are active) and an optional
    /// override for the complex structure.
    pub fn eval_in_ctx(
        chart: &Chart,
        x: &[f64],
        ctx: &JetContext,
        j_override: Option<JetMatrix>,
    ) -> Result<PointBundle> {
        let vars = chart.seed_vars(ctx, x, None)?;
        let omega_m = chart.eval_matrix(&chart.omega, ctx, &vars)?;
        let j_m = match j_override {
            Some(m) => m,
            None => chart.eval_j(ctx, &vars)?,
        };
        Self::assemble(chart, x, ctx, omega_m, j_m)
    }

    pub fn assemble(
        chart: &Chart,
        x: &[f64],
        ctx: &JetContext,
        omega_m: JetMatrix,
        j_m: JetMatrix,
    ) -> Result<PointBundle> {
        let dim = chart.dim;

        // Antisymmetry of ω.
        let mut antisym = 0.0f64;
        for i in 0..dim {
            for k in 0..dim {
                antisym = antisym.max((omega_m.at(i, k).value() + omega_m.at(k, i).value()).abs());
            }
        }
        if antisym > STRUCTURE_TOL {
            return Err(Error::Compatibility {
                check: "omega antisymmetry",
                residual: antisym,
            });
        }
        let det = omega_m.det()?.value();
        if det.abs() < 1e-12 {
            return Err(Error::DegenerateOmega { det });
        }
        let omega_inv_m = omega_m
            .inverse()
            .map_err(|_| Error::DegenerateOmega { det })?;

        // J² = −Id.
        let j2 = j_m.matmul(&j_m);
        let mut j2_res = 0.0f64;
        for i in 0..dim {
            for k in 0..dim {
                let want = if i == k { -1.0 } else { 0.0 };
                j2_res = j2_res.max((j2.at(i, k).value() - want).abs());
            }
        }
        if j2_res > STRUCTURE_TOL {
            return Err(Error::Compatibility {
                check: "J squared",
                residual: j2_res,
            });
        }

        // Compatibility ω(J·, J·) = ω: ω_cd J^c_a J^d_b = ω_ab.
        let jt_omega_j = {
            let jt = JetMatrix::from_fn(dim, |i, k| j_m.at(k, i).clone());
            jt.matmul(&omega_m).matmul(&j_m)
        };
        let mut compat = 0.0f64;
        for i in 0..dim {
            for k in 0..dim {
                compat =
                    compat.max((jt_omega_j.at(i, k).value() - omega_m.at(i, k).value()).abs());
            }
        }
        if compat > STRUCTURE_TOL {
            return Err(Error::Compatibility {
                check: "omega(J.,J.) = omega",
                residual: compat,
            });
        }

        // g_ab = ω_ac J^c_b, symmetric positive definite.
        let g_m = omega_m.matmul(&j_m);
        let mut sym = 0.0f64;
        for i in 0..dim {
            for k in 0..dim {
                sym = sym.max((g_m.at(i, k).value() - g_m.at(k, i).value()).abs());
            }
        }
        if sym > STRUCTURE_TOL {
            return Err(Error::Compatibility {
                check: "metric symmetry",
                residual: sym,
            });
        }
        let g0: Vec<f64> = g_m.data.iter().map(|j| j.value()).collect();
        if !is_spd(&g0, dim) {
            return Err(Error::NotPositiveDefinite);
        }
        let g_inv_m = g_m.inverse().map_err(|_| Error::NotPositiveDefinite)?;

        Ok(PointBundle {
            ctx: ctx.clone(),
            dim,
            x: x.to_vec(),
            omega: tensor_from_matrix(&omega_m, [Down, Down]),
            omega_inv: tensor_from_matrix(&omega_inv_m, [Up, Up]),
            j: tensor_from_matrix(&j_m, [Up, Down]),
            g: tensor_from_matrix(&g_m, [Down, Down]),
            g_inv: tensor_from_matrix(&g_inv_m, [Up, Up]),
            compat_residual: compat,
            j_squared_residual: j2_res,
        })
    }

    /// Exterior derivative of ω: (dω)_abc = ∂_a ω_bc + ∂_b ω_ca + ∂_c ω_ab.
    pub fn d_omega(&self) -> TensorValue {
        let d = self.dim;
        TensorValue::from_fn(&self.ctx, d, &[Down, Down, Down], |idx| {
            let (a, b, c) = (idx[0], idx[1], idx[2]);
            let t1 = self.omega.get(&[b, c]).partial(a);
            let t2 = self.omega.get(&[c, a]).partial(b);
            let t3 = self.omega.get(&[a, b]).partial(c);
            &(&t1 + &t2) + &t3
        })
    }

    /// Lee form by pointwise least squares on dω = θ∧ω, solved in jet
    /// arithmetic so that θ carries exact derivatives; doubles as an lcs
    /// validity certificate.
    pub fn lee_form(&self) -> Result<LeeForm> {
        lee_form_from_omega(&self.ctx, self.dim, &self.omega)
    }
}

/// Lee extraction from ω alone (it does not involve J or g).
pub fn lee_form_from_omega(ctx: &JetContext, dim: usize, omega: &TensorValue) -> Result<LeeForm> {
    {
        let d = dim;
        let domega = TensorValue::from_fn(ctx, d, &[Down, Down, Down], |idx| {
            let (a, b, c) = (idx[0], idx[1], idx[2]);
            let t1 = omega.get(&[b, c]).partial(a);
            let t2 = omega.get(&[c, a]).partial(b);
            let t3 = omega.get(&[a, b]).partial(c);
            &(&t1 + &t2) + &t3
        });

        // Equations over index triples a<b<c:
        //   θ_a ω_bc + θ_b ω_ca + θ_c ω_ab = (dω)_abc.
        let mut triples = Vec::new();
        for a in 0..d {
            for b in a + 1..d {
                for c in b + 1..d {
                    triples.push((a, b, c));
                }
            }
        }
        // Normal equations M^T M θ = M^T v in jets.
        let mut mtm = vec![ctx.zero(); d * d];
        let mut mtv = vec![ctx.zero(); d];
        let mut row = vec![ctx.zero(); d];
        for &(a, b, c) in &triples {
            for e in row.iter_mut() {
                *e = ctx.zero();
            }
            row[a] = &row[a] + omega.get(&[b, c]);
            row[b] = &row[b] + omega.get(&[c, a]);
            row[c] = &row[c] + omega.get(&[a, b]);
            let rhs = domega.get(&[a, b, c]);
            for i in 0..d {
                for k in 0..d {
                    mtm[i * d + k] = &mtm[i * d + k] + &(&row[i] * &row[k]);
                }
                mtv[i] = &mtv[i] + &(&row[i] * rhs);
            }
        }
        let m = JetMatrix {
            n: d,
            data: mtm.clone(),
        };
        let m_inv = m.inverse().map_err(|_| Error::Compatibility {
            check: "lee normal equations",
            residual: f64::INFINITY,
        })?;
        let mut theta_comp = Vec::with_capacity(d);
        for i in 0..d {
            let mut acc = ctx.zero();
            for k in 0..d {
                acc = &acc + &(m_inv.at(i, k) * &mtv[k]);
            }
            theta_comp.push(acc);
        }
        let theta = TensorValue::from_fn(ctx, d, &[Down], |idx| theta_comp[idx[0]].clone());

        // Wedge defect at the point.
        let mut wedge = 0.0f64;
        let mut scale = 0.0f64;
        for &(a, b, c) in &triples {
            let model = &(&(&theta_comp[a] * omega.get(&[b, c]))
                + &(&theta_comp[b] * omega.get(&[c, a])))
                + &(&theta_comp[c] * omega.get(&[a, b]));
            let got = domega.get(&[a, b, c]);
            wedge = wedge.max((model.value() - got.value()).abs());
            scale = scale.max(got.value().abs());
        }
        let wedge_residual = wedge / scale.max(1.0);

        // Closedness of θ (uses the degree-1 jet coefficients of θ).
        let mut dtheta = 0.0f64;
        let mut theta_scale = 0.0f64;
        for a in 0..d {
            theta_scale = theta_scale.max(theta_comp[a].value().abs());
            for b in a + 1..d {
                let v = theta_comp[b].partial(a).value() - theta_comp[a].partial(b).value();
                dtheta = dtheta.max(v.abs());
            }
        }
        let dtheta_residual = dtheta / theta_scale.max(1.0);

        // Conditioning of the (constant-term) normal matrix.
        let m0: Vec<f64> = mtm.iter().map(|j| j.value()).collect();
        let eigs = sym_eigenvalues(&m0, d);
        let condition = if eigs[0] > 0.0 {
            eigs[d - 1] / eigs[0]
        } else {
            f64::INFINITY
        };

        Ok(LeeForm {
            theta,
            residual: wedge_residual.max(dtheta_residual),
            wedge_residual,
            dtheta_residual,
            condition,
        })
    }
}

impl PointBundle {
    /// Nijenhuis tensor N^a_bc assembled from coordinate brackets.
    pub fn nijenhuis(&self) -> TensorValue {
        let d = self.dim;
        TensorValue::from_fn(&self.ctx, d, &[Up, Down, Down], |idx| {
            let (a, b, c) = (idx[0], idx[1], idx[2]);
            let mut acc = self.ctx.zero();
            for e in 0..d {
                // [JX, JY] part: J^e_b ∂_e J^a_c − J^e_c ∂_e J^a_b.
                acc = &acc + &(self.j.get(&[e, b]) * &self.j.get(&[a, c]).partial(e));
                acc = &acc - &(self.j.get(&[e, c]) * &self.j.get(&[a, b]).partial(e));
                // −J[JX,Y] − J[X,JY] parts: +J^a_e ∂_c J^e_b − J^a_e ∂_b J^e_c.
                acc = &acc + &(self.j.get(&[a, e]) * &self.j.get(&[e, b]).partial(c));
                acc = &acc - &(self.j.get(&[a, e]) * &self.j.get(&[e, c]).partial(b));
            }
            acc
        })
    }

    /// Scalar residual ‖N_J‖∞ at the point.
    pub fn nijenhuis_residual(&self) -> f64 {
        self.nijenhuis().value_norm_inf()
    }

    /// Pf(ω): the coefficient of ωⁿ/n! against the coordinate volume,
    /// cross-checked against √det g. Errors on non-positive density.
    pub fn volume_density(&self) -> Result<Jet> {
        let pf = pfaffian(&matrix_from_tensor(&self.omega));
        let v = pf.value();
        if v <= 0.0 {
            return Err(Error::NonPositiveDensity {
                point: self.x.clone(),
                value: v,
            });
        }
        let detg = matrix_from_tensor(&self.g).det()?;
        let sqrt_detg = detg.sqrt()?;
        let rel = (v - sqrt_detg.value()).abs() / v.abs().max(1e-300);
        if rel > 1e-10 {
            return Err(Error::Compatibility {
                check: "Pf(omega) vs sqrt(det g)",
                residual: rel,
            });
        }
        Ok(pf)
    }
}

/// Raise or lower one tensor slot with the metric.
pub fn musical(value: &TensorValue, g: &TensorValue, g_inv: &TensorValue, slot: usize) -> TensorValue {
    let rank = value.rank();
    assert!(slot < rank);
    let metric = match value.sig()[slot] {
        Down => g_inv, // sharp: raise
        Up => g,       // flat: lower
    };
    // Contract slot with the second metric slot; move result back into place.
    let prod = metric.mul_outer(value);
    let contracted = prod.contract(1, 2 + slot);
    // contracted slots: [metric_first, value slots with `slot` removed];
    // rotate the first slot into position `slot`.
    let ctx = value.comps()[0].context().clone();
    let dim = value.dim();
    let mut sig = value.sig().to_vec();
    sig[slot] = match value.sig()[slot] {
        Down => Up,
        Up => Down,
    };
    TensorValue::from_fn(&ctx, dim, &sig, |idx| {
        let mut perm = Vec::with_capacity(rank);
        perm.push(idx[slot]);
        for (k, &i) in idx.iter().enumerate() {
            if k != slot {
                perm.push(i);
            }
        }
        contracted.get(&perm).clone()
    })
}

/// Pfaffian of an antisymmetric jet matrix by recursive expansion.
fn pfaffian(m: &JetMatrix) -> Jet {
    let n = m.n;
    let ctx = m.data[0].context().clone();
    if n == 0 {
        return ctx.constant(1.0);
    }
    if n % 2 == 1 {
        return ctx.zero();
    }
    if n == 2 {
        return m.at(0, 1).clone();
    }
    let mut acc = ctx.zero();
    let mut sign = 1.0;
    for j in 1..n {
        // Minor with rows/cols {0, j} removed.
        let keep: Vec<usize> = (0..n).filter(|&k| k != 0 && k != j).collect();
        let minor = JetMatrix::from_fn(n - 2, |r, c| m.at(keep[r], keep[c]).clone());
        acc = &acc + &(&m.at(0, j).scale(sign) * &pfaffian(&minor));
        sign = -sign;
    }
    acc
}

/// Cholesky-based SPD test on the constant part.
fn is_spd(g: &[f64], n: usize) -> bool {
    let mut l = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = g[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 {
                    return false;
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    true
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _ in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m[p * n + q].abs());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}
