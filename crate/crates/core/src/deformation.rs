//! Tangent directions to the space of compatible almost complex structures:
//! ω-skew endomorphism fields a, the curves J_t = exp(−ta) J exp(ta), the
//! derived tensors â = [J, a] and å = −J â, and the linearization checks.

use crate::chart::{sp_project, Chart};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::PointBundle;
use crate::jet::{Jet, JetContext};
use crate::jet_matrix::JetMatrix;
use crate::tensor::{Down, TensorValue, Up};

/// An endomorphism field used to generate tangent directions [J, a].
///
/// The raw component matrix is projected onto sp(TM, ω) at evaluation time by
/// a ↦ ½(a − ω⁻¹ aᵀ ω), so membership holds to roundoff by construction; the
/// residual is still validated.
#[derive(Clone, Debug)]
pub struct DeformationField {
    pub name: String,
    pub raw: Vec<Vec<Expr>>,
    pub sp_project: bool,
}

impl DeformationField {
    /// Evaluate a^b_c at the bundle's point, in the bundle's context.
    pub fn eval(&self, chart: &Chart, bundle: &PointBundle) -> Result<JetMatrix> {
        let ctx = &bundle.ctx;
        let vars = chart.seed_vars(ctx, &bundle.x, None)?;
        let raw = chart.eval_matrix(&self.raw, ctx, &vars)?;
        let omega = JetMatrix::from_fn(bundle.dim, |i, j| bundle.omega.get(&[i, j]).clone());
        let a = if self.sp_project {
            sp_project(&raw, &omega)?
        } else {
            raw
        };
        let resid = sp_residual(&a, &omega);
        if resid > 1e-11 {
            return Err(Error::NotSymplectic {
                name: self.name.clone(),
                residual: resid,
            });
        }
        Ok(a)
    }
}

/// max |(ω a)_{bc} − (ω a)_{cb}|: zero exactly when a ∈ sp(TM, ω).
pub fn sp_residual(a: &JetMatrix, omega: &JetMatrix) -> f64 {
    let s = omega.matmul(a);
    let n = a.n;
    let mut r = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            r = r.max((s.at(i, j).value() - s.at(j, i).value()).abs());
        }
    }
    r
}

/// The tangent vector â = [J, a] and its companion å = −J â.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub a_hat: TensorValue,
    pub ring_a: TensorValue,
}

impl TangentVector {
    pub fn new(bundle: &PointBundle, a: &JetMatrix) -> TangentVector {
        let d = bundle.dim;
        let j = JetMatrix::from_fn(d, |i, k| bundle.j.get(&[i, k]).clone());
        let a_hat_m = j.matmul(a).add(&a.matmul(&j).scale(-1.0));
        let ring_m = j.matmul(&a_hat_m).scale(-1.0);
        let a_hat = TensorValue::from_fn(&bundle.ctx, d, &[Up, Down], |idx| {
            a_hat_m.at(idx[0], idx[1]).clone()
        });
        let ring_a = TensorValue::from_fn(&bundle.ctx, d, &[Up, Down], |idx| {
            ring_m.at(idx[0], idx[1]).clone()
        });
        TangentVector { a_hat, ring_a }
    }
}

/// Bundle along the conjugation curve J_t = exp(−ta) J exp(ta), with `t`
/// seeded as the jet variable directly after the chart coordinates.
pub fn curve_eval(chart: &Chart, x: &[f64], field: &DeformationField, order: usize) -> Result<PointBundle> {
    let ctx = JetContext::new(chart.dim + 1, order);
    curve_eval_in_ctx(chart, x, field, &ctx, chart.dim)
}

/// Same, with caller-controlled context and t-variable index.
pub fn curve_eval_in_ctx(
    chart: &Chart,
    x: &[f64],
    field: &DeformationField,
    ctx: &JetContext,
    t_var: usize,
) -> Result<PointBundle> {
    // Seed coordinates manually: the chart context would not know about t.
    let xn = chart.normalize_point(x)?;
    let mut vars = Vec::with_capacity(chart.dim);
    for (i, xi) in xn.iter().enumerate() {
        vars.push(ctx.seed(i, *xi)?);
    }
    let omega_m = chart.eval_matrix(&chart.omega, ctx, &vars)?;
    let j_base = chart.eval_matrix(&chart.j, ctx, &vars)?;
    let raw = chart.eval_matrix(&field.raw, ctx, &vars)?;
    let a = if field.sp_project {
        sp_project(&raw, &omega_m)?
    } else {
        raw
    };
    let resid = sp_residual(&a, &omega_m);
    if resid > 1e-11 {
        return Err(Error::NotSymplectic {
            name: field.name.clone(),
            residual: resid,
        });
    }
    let t = ctx.seed(t_var, 0.0)?;
    let ta = JetMatrix::from_fn(chart.dim, |i, j| &t * a.at(i, j));
    let e_neg = ta.scale(-1.0).expm();
    let e_pos = ta.expm();
    let j_t = e_neg.matmul(&j_base).matmul(&e_pos);
    PointBundle::assemble(chart, &xn, ctx, omega_m, j_t)
}

/// Extract the ∂_t |_{t=0} coefficient of a jet (t seeded at `t_var`).
pub fn t_derivative(j: &Jet, t_var: usize) -> f64 {
    j.deriv(t_var)
}

/// Pointwise algebraic checks behind the Kähler structure of the space of
/// compatible almost complex structures: tr(J[J,a][J,b]) = 2 tr(J[a,b]) and
/// the cyclic vanishing of tr(J[[a,b],c]).
pub fn trace_identities(j: &JetMatrix, a: &JetMatrix, b: &JetMatrix, c: &JetMatrix) -> (f64, f64) {
    let comm = |x: &JetMatrix, y: &JetMatrix| x.matmul(y).add(&y.matmul(x).scale(-1.0));
    let ja = comm(j, a);
    let jb = comm(j, b);
    let lhs1 = j.matmul(&ja).matmul(&jb).trace().value();
    let rhs1 = 2.0 * j.matmul(&comm(a, b)).trace().value();
    let first = (lhs1 - rhs1).abs() / lhs1.abs().max(rhs1.abs()).max(1.0);

    let cyc = j.matmul(&comm(&comm(a, b), c)).trace().value()
        + j.matmul(&comm(&comm(b, c), a)).trace().value()
        + j.matmul(&comm(&comm(c, a), b)).trace().value();
    let second = cyc.abs();
    (first, second)
}

/// Residual of [â, b̂] = widehat{[a,b]}: the double flow derivative
/// ∂²/∂t∂s of exp(ta)exp(−sb)exp(−ta) · J · exp(ta)exp(sb)exp(−ta) against
/// [J, ab − ba].
pub fn basic_bracket_check(
    chart: &Chart,
    x: &[f64],
    a_field: &DeformationField,
    b_field: &DeformationField,
) -> Result<f64> {
    // Pointwise in x; two jet variables t, s at order 2.
    let ctx = JetContext::new(2, 2);
    let base = PointBundle::eval(chart, x, 1)?;
    let d = chart.dim;
    let lift = |m: &TensorValue| JetMatrix::from_fn(d, |i, k| ctx.constant(m.get(&[i, k]).value()));
    let j = lift(&base.j);
    let a_m = a_field.eval(chart, &base)?;
    let b_m = b_field.eval(chart, &base)?;
    let a = JetMatrix::from_fn(d, |i, k| ctx.constant(a_m.at(i, k).value()));
    let b = JetMatrix::from_fn(d, |i, k| ctx.constant(b_m.at(i, k).value()));

    let t = ctx.seed(0, 0.0)?;
    let s = ctx.seed(1, 0.0)?;
    let ta = JetMatrix::from_fn(d, |i, k| &t * a.at(i, k));
    let sb = JetMatrix::from_fn(d, |i, k| &s * b.at(i, k));
    let left = ta.expm().matmul(&sb.scale(-1.0).expm()).matmul(&ta.scale(-1.0).expm());
    let right = ta.expm().matmul(&sb.expm()).matmul(&ta.scale(-1.0).expm());
    let curve = left.matmul(&j).matmul(&right);

    let comm = |x: &JetMatrix, y: &JetMatrix| x.matmul(y).add(&y.matmul(x).scale(-1.0));
    let want = comm(&j, &comm(&a, &b));

    let mut resid = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..d {
        for k in 0..d {
            let got = curve.at(i, k).coeff(&[1, 1]);
            let w = want.at(i, k).value();
            resid = resid.max((got - w).abs());
            scale = scale.max(w.abs());
        }
    }
    Ok(resid / scale.max(1.0))
}

/// Quantity whose t-derivative along J_t is compared against its closed-form
/// linearization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinearizedQuantity {
    ThetaSharp,
    NormThetaSq,
    Scal,
    DstarTheta,
    MuExtended,
}

/// One linearization check: the jet-side t-derivative and the closed-form
/// right-hand side, assembled independently at t = 0.
#[derive(Clone, Debug)]
pub struct LinearizationCheck {
    pub quantity: LinearizedQuantity,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub residual: f64,
}

fn rel(lhs: &[f64], rhs: &[f64]) -> f64 {
    let mut scale = 1.0f64;
    for v in lhs.iter().chain(rhs) {
        scale = scale.max(v.abs());
    }
    lhs.iter()
        .zip(rhs)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / scale
}

/// Evaluate a linearization identity at `x`.
///
/// The left side is obtained purely by jet t-differentiation of the base
/// operators along J_t = exp(−ta) J exp(ta); the right side is assembled from
/// the closed forms at t = 0:
///   (θ♯)′ = −å(θ♯),
///   (|θ|²)′ = −g(å, θ⊗θ♯),
///   scal′ = d*(δå) + (n−1)/2 g(å, θ⊗θ♯),
///   (d*θ)′ = −(δå)(θ♯),
/// and their combination for the extended μ.
///
/// scal′, (d*θ)′ and μ′ hold for integrable J and K-invariant a; callers gate
/// on those hypotheses.
pub fn linearize(
    chart: &Chart,
    x: &[f64],
    field: &DeformationField,
    quantity: LinearizedQuantity,
    order: usize,
) -> Result<LinearizationCheck> {
    use crate::riemannian as rm;

    let t_var = chart.dim;
    let curve = curve_eval(chart, x, field, order)?;
    let lee_t = curve.lee_form()?;
    let conn_t = rm::levi_civita(&curve)?;

    // Jet-side values.
    let lhs: Vec<f64> = match quantity {
        LinearizedQuantity::ThetaSharp => {
            let sharp_t = rm::sharp(&curve, &lee_t.theta);
            (0..curve.dim).map(|a| sharp_t.get(&[a]).deriv(t_var)).collect()
        }
        LinearizedQuantity::NormThetaSq => {
            let nt2 = rm::pair(&lee_t.theta, &rm::sharp(&curve, &lee_t.theta));
            vec![nt2.deriv(t_var)]
        }
        LinearizedQuantity::Scal => {
            let curv = rm::curvature(&curve, &conn_t);
            vec![curv.scal.deriv(t_var)]
        }
        LinearizedQuantity::DstarTheta => {
            vec![rm::codiff_one_form(&curve, &conn_t, &lee_t.theta).deriv(t_var)]
        }
        LinearizedQuantity::MuExtended => {
            let m = crate::lck::mu(&curve, &lee_t, &conn_t, None)?;
            vec![m.mu_extended.deriv(t_var)]
        }
    };

    // Formula side at t = 0, in a coordinates-only context.
    let base = PointBundle::eval(chart, x, order)?;
    let lee = base.lee_form()?;
    let conn = rm::levi_civita(&base)?;
    let a = field.eval(chart, &base)?;
    let tangent = TangentVector::new(&base, &a);
    let ring = &tangent.ring_a;
    let theta_sharp = rm::sharp(&base, &lee.theta);
    let n_half = (base.dim / 2) as f64;

    // å(θ♯) and g(å, θ⊗θ♯) = θ(å θ♯).
    let ring_theta_sharp = TensorValue::from_fn(&base.ctx, base.dim, &[Up], |idx| {
        let i = idx[0];
        let mut acc = base.ctx.zero();
        for e in 0..base.dim {
            acc = &acc + &(ring.get(&[i, e]) * theta_sharp.get(&[e]));
        }
        acc
    });
    let g_ring_theta = rm::pair(&lee.theta, &ring_theta_sharp);
    let delta_ring = rm::delta_sym_endo(&base, &conn, ring)?;
    let dstar_delta_ring = rm::codiff_one_form(&base, &conn, &delta_ring);
    let delta_ring_theta_sharp = rm::pair(&delta_ring, &theta_sharp);

    let rhs: Vec<f64> = match quantity {
        LinearizedQuantity::ThetaSharp => {
            (0..base.dim).map(|a| -ring_theta_sharp.get(&[a]).value()).collect()
        }
        LinearizedQuantity::NormThetaSq => vec![-g_ring_theta.value()],
        LinearizedQuantity::Scal => {
            vec![dstar_delta_ring.value() + (n_half - 1.0) / 2.0 * g_ring_theta.value()]
        }
        LinearizedQuantity::DstarTheta => vec![-delta_ring_theta_sharp.value()],
        LinearizedQuantity::MuExtended => {
            vec![dstar_delta_ring.value() - delta_ring_theta_sharp.value()]
        }
    };

    let residual = rel(&lhs, &rhs);
    Ok(LinearizationCheck {
        quantity,
        lhs,
        rhs,
        residual,
    })
}

/// Residual of L_{k} a = 0 over the chart generators: K-invariance of a
/// deformation field.
pub fn k_invariance_residual(chart: &Chart, x: &[f64], field: &DeformationField) -> Result<f64> {
    let bundle = PointBundle::eval(chart, x, 2)?;
    let a = field.eval(chart, &bundle)?;
    let a_t = TensorValue::from_fn(&bundle.ctx, bundle.dim, &[Up, Down], |idx| {
        a.at(idx[0], idx[1]).clone()
    });
    let ctx = &bundle.ctx;
    let vars = chart.seed_vars(ctx, &bundle.x, None)?;
    let mut worst: f64 = 0.0;
    for gen in &chart.generators {
        let k = TensorValue::from_fn(ctx, bundle.dim, &[Up], |idx| {
            gen[idx[0]].eval(ctx, &vars).unwrap()
        });
        let lie = crate::riemannian::lie_derivative(&bundle, &k, &a_t);
        worst = worst.max(lie.value_norm_inf());
    }
    Ok(worst / a_t.value_norm_inf().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{hopf_standard, kaehler_flat};
    use crate::riemannian::rel_residual;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn library_fields_are_symplectic_and_invariant() {
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for field in &entry.deformations {
            for _ in 0..5 {
                let x = entry.chart.sample_point(&mut rng);
                let b = PointBundle::eval(&entry.chart, &x, 2).unwrap();
                let a = field.eval(&entry.chart, &b).unwrap(); // sp gate inside
                let omega = JetMatrix::from_fn(4, |i, j| b.omega.get(&[i, j]).clone());
                assert!(sp_residual(&a, &omega) < 1e-12);
                let inv = k_invariance_residual(&entry.chart, &x, field).unwrap();
                assert!(inv < 1e-10, "{} invariance {}", field.name, inv);
                // The direction [J, a] must be nonzero for the tests to bite.
                let tv = TangentVector::new(&b, &a);
                assert!(tv.a_hat.value_norm_inf() > 1e-3, "{} has trivial [J,a]", field.name);
            }
        }
    }

    #[test]
    fn tangent_vector_properties() {
        // Ju + uJ = 0, u ∈ sp for u = [J,a]; å symmetric, J-anti-invariant,
        // trace-free; reconstruction u = [J, −½Ju].
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = entry.chart.sample_point(&mut rng);
        let b = PointBundle::eval(&entry.chart, &x, 2).unwrap();
        for field in &entry.deformations {
            let a = field.eval(&entry.chart, &b).unwrap();
            let tv = TangentVector::new(&b, &a);
            let d = 4;
            let j = JetMatrix::from_fn(d, |i, k| b.j.get(&[i, k]).clone());
            let u = JetMatrix::from_fn(d, |i, k| tv.a_hat.get(&[i, k]).clone());
            // anti-commutation
            let anti = j.matmul(&u).add(&u.matmul(&j));
            assert!(anti.norm_inf() < 1e-12);
            // sp membership
            let omega = JetMatrix::from_fn(d, |i, k| b.omega.get(&[i, k]).clone());
            assert!(sp_residual(&u, &omega) < 1e-12);
            // å properties
            assert!(crate::riemannian::g_symmetry_residual(&b, &tv.ring_a) < 1e-12);
            let ja = j.matmul(&JetMatrix::from_fn(d, |i, k| tv.ring_a.get(&[i, k]).clone()));
            let aj = JetMatrix::from_fn(d, |i, k| tv.ring_a.get(&[i, k]).clone()).matmul(&j);
            assert!(ja.add(&aj).norm_inf() < 1e-12);
            let mut tr = 0.0;
            for i in 0..d {
                tr += tv.ring_a.get(&[i, i]).value();
            }
            assert!(tr.abs() < 1e-12);
            // reconstruction
            let minus_half_ju = j.matmul(&u).scale(-0.5);
            let rebuilt = j
                .matmul(&minus_half_ju)
                .add(&minus_half_ju.matmul(&j).scale(-1.0));
            let mut resid = 0.0f64;
            for i in 0..d {
                for k in 0..d {
                    resid = resid.max((rebuilt.at(i, k).value() - u.at(i, k).value()).abs());
                }
            }
            assert!(resid < 1e-12);
        }
    }

    #[test]
    fn curve_preserves_compatibility_and_volume_at_all_t_coefficients() {
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let x = entry.chart.sample_point(&mut rng);
        let field = &entry.deformations[0];
        let curve = curve_eval(&entry.chart, &x, field, 3).unwrap();
        let d = 4;
        // ω(J_t·, J_t·) = ω at every jet coefficient.
        let jm = JetMatrix::from_fn(d, |i, k| curve.j.get(&[i, k]).clone());
        let om = JetMatrix::from_fn(d, |i, k| curve.omega.get(&[i, k]).clone());
        let jt = JetMatrix::from_fn(d, |i, k| jm.at(k, i).clone());
        let pullback = jt.matmul(&om).matmul(&jm);
        let mut resid = 0.0f64;
        for i in 0..d {
            for k in 0..d {
                for (a, b) in pullback.at(i, k).coeffs().iter().zip(om.at(i, k).coeffs()) {
                    resid = resid.max((a - b).abs());
                }
            }
        }
        assert!(resid < 1e-10, "compatibility along the curve {}", resid);

        // J_t² = −Id at every coefficient.
        let j2 = jm.matmul(&jm);
        let mut resid2 = 0.0f64;
        for i in 0..d {
            for k in 0..d {
                let want = if i == k { -1.0 } else { 0.0 };
                for (deg, c) in j2.at(i, k).coeffs().iter().enumerate() {
                    let w = if deg == 0 { want } else { 0.0 };
                    resid2 = resid2.max((c - w).abs());
                }
            }
        }
        assert!(resid2 < 1e-10);

        // Pf(ω) has no t-dependence.
        let pf = curve.volume_density().unwrap();
        assert!(pf.deriv(4).abs() < 1e-12);
    }

    #[test]
    fn curve_tangent_is_bracket() {
        // ∂_t J_t |₀ = [J, a].
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let x = entry.chart.sample_point(&mut rng);
        let field = &entry.deformations[1];
        let curve = curve_eval(&entry.chart, &x, field, 2).unwrap();
        let base = PointBundle::eval(&entry.chart, &x, 2).unwrap();
        let a = field.eval(&entry.chart, &base).unwrap();
        let tv = TangentVector::new(&base, &a);
        for i in 0..4 {
            for k in 0..4 {
                let got = curve.j.get(&[i, k]).deriv(4);
                let want = tv.a_hat.get(&[i, k]).value();
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn g_prime_identity() {
        // ∂_t g_t(X,Y)|₀ = g(åX, Y).
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let x = entry.chart.sample_point(&mut rng);
        for field in &entry.deformations {
            let curve = curve_eval(&entry.chart, &x, field, 2).unwrap();
            let base = PointBundle::eval(&entry.chart, &x, 2).unwrap();
            let a = field.eval(&entry.chart, &base).unwrap();
            let tv = TangentVector::new(&base, &a);
            let mut resid = 0.0f64;
            let mut scale = 1.0f64;
            for i in 0..4 {
                for k in 0..4 {
                    let got = curve.g.get(&[i, k]).deriv(4);
                    let mut want = 0.0;
                    for e in 0..4 {
                        want += base.g.get(&[e, k]).value() * tv.ring_a.get(&[e, i]).value();
                    }
                    resid = resid.max((got - want).abs());
                    scale = scale.max(want.abs());
                }
            }
            assert!(resid / scale < 1e-10, "{}: g' residual {}", field.name, resid);
        }
    }

    #[test]
    fn zero_field_gives_zero_primes() {
        let entry = kaehler_flat();
        let zero_field = DeformationField {
            name: "zero".into(),
            raw: vec![vec![crate::expr::c(0.0); 4]; 4],
            sp_project: false,
        };
        let x = [0.4, 1.0, 2.0, 3.0];
        for q in [
            LinearizedQuantity::ThetaSharp,
            LinearizedQuantity::NormThetaSq,
            LinearizedQuantity::Scal,
            LinearizedQuantity::DstarTheta,
            LinearizedQuantity::MuExtended,
        ] {
            let chk = linearize(&entry.chart, &x, &zero_field, q, 3).unwrap();
            for v in chk.lhs.iter().chain(&chk.rhs) {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linearizations_hold_on_hopf() {
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        for field in &entry.deformations {
            for _ in 0..3 {
                let x = entry.chart.sample_point(&mut rng);
                for (q, tol) in [
                    (LinearizedQuantity::ThetaSharp, 1e-9),
                    (LinearizedQuantity::NormThetaSq, 1e-9),
                    (LinearizedQuantity::Scal, 1e-7),
                    (LinearizedQuantity::DstarTheta, 1e-7),
                    (LinearizedQuantity::MuExtended, 1e-7),
                ] {
                    let chk = linearize(&entry.chart, &x, field, q, 3).unwrap();
                    assert!(
                        chk.residual < tol,
                        "{}: {:?} residual {} (lhs {:?} rhs {:?})",
                        field.name,
                        q,
                        chk.residual,
                        chk.lhs,
                        chk.rhs
                    );
                }
            }
        }
    }

    #[test]
    fn kaehler_reduction_of_scal_prime() {
        // θ = 0: scal′ = d*(δå), the classical linearization.
        let entry = kaehler_flat();
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for field in &entry.deformations {
            let x = entry.chart.sample_point(&mut rng);
            let chk = linearize(&entry.chart, &x, field, LinearizedQuantity::Scal, 3).unwrap();
            assert!(chk.residual < 1e-9, "{}: {}", field.name, chk.residual);
        }
    }

    #[test]
    fn bracket_of_basic_fields() {
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        let x = entry.chart.sample_point(&mut rng);
        // b = a → 0; also commuting constant fields → 0.
        let a = &entry.deformations[0];
        let r_same = basic_bracket_check(&entry.chart, &x, a, a).unwrap();
        assert!(r_same < 1e-12);
        // random pair
        let b = &entry.deformations[2];
        let r = basic_bracket_check(&entry.chart, &x, a, b).unwrap();
        assert!(r < 1e-9, "bracket residual {}", r);
    }

    #[test]
    fn trace_identity_checks() {
        let ctx = crate::jet::JetContext::new(1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(49);
        // J of the flat chart, constant.
        let entry = kaehler_flat();
        let b = PointBundle::eval(&entry.chart, &[1.0, 2.0, 3.0, 4.0], 1).unwrap();
        let j = JetMatrix::from_fn(4, |i, k| ctx.constant(b.j.get(&[i, k]).value()));
        let rand_m = |rng: &mut ChaCha8Rng| {
            JetMatrix::from_fn(4, |_, _| ctx.constant(rng.gen_range(-1.0..1.0)))
        };
        use rand::Rng;
        for _ in 0..10 {
            let a = rand_m(&mut rng);
            let bb = rand_m(&mut rng);
            let c = rand_m(&mut rng);
            let (first, second) = trace_identities(&j, &a, &bb, &c);
            assert!(first < 1e-12, "trace identity {}", first);
            assert!(second < 1e-12, "cyclic identity {}", second);
            // a = b: both sides of the first identity vanish.
            let (f2, _) = trace_identities(&j, &a, &a, &c);
            assert!(f2 < 1e-12);
        }
    }

    #[test]
    fn nijenhuis_rate_along_curve_is_generically_nonzero() {
        // Integrability is not preserved along conjugation curves: the t-jet
        // of the Nijenhuis tensor is finite and generically nonzero.
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let x = entry.chart.sample_point(&mut rng);
        let field = &entry.deformations[1];
        let curve = curve_eval(&entry.chart, &x, field, 2).unwrap();
        let nj = curve.nijenhuis();
        let mut rate = 0.0f64;
        for comp in nj.comps() {
            rate = rate.max(comp.deriv(4).abs());
        }
        assert!(rate.is_finite());
        assert!(rate > 1e-6, "expected nonzero integrability rate, got {}", rate);
    }

    #[test]
    fn k_invariant_prime_commutes_with_generators() {
        // L_{k_i}(∂_t scal_t|₀) = 0 for K-invariant a; needs order-4 jets.
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let x = entry.chart.sample_point(&mut rng);
        let field = &entry.deformations[0];
        let curve = curve_eval(&entry.chart, &x, field, 4).unwrap();
        let conn = crate::riemannian::levi_civita(&curve).unwrap();
        let scal_t = crate::riemannian::curvature(&curve, &conn).scal;
        let prime = scal_t.partial(4);
        // Generators are coordinate fields ∂φ₁, ∂φ₂: directional derivative.
        for var in [2usize, 3] {
            let v = prime.deriv(var);
            assert!(v.abs() < 1e-9, "L_k scal' = {}", v);
        }
    }
}
