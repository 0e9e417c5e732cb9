//! The Weyl and Chern connections of a locally conformally (almost) Kähler
//! structure, their torsions and curvatures, the three scalar curvatures and
//! their relations, and the moment-map integrand μ.
//!
//! Identities proved only for integrable J are gated on the Nijenhuis
//! residual (threshold [`INTEGRABILITY_TOL`]); the unconditional ones run on
//! any compatible almost complex structure.

use crate::error::{Error, Result};
use crate::geometry::{LeeForm, PointBundle};
use crate::jet::Jet;
use crate::riemannian::{
    codiff_one_form, cov_deriv_endo, cov_deriv_covector, cov_deriv_two_form, curvature_tensor,
    pair, sharp, ConnectionCoefficients,
};
use crate::tensor::{Down, TensorValue, Up};

/// Nijenhuis residual below which a structure is treated as integrable.
pub const INTEGRABILITY_TOL: f64 = 1e-8;

/// Residuals of the four defining properties of the Weyl connection:
/// T^∇ = 0, ∇ω = θ⊗ω, ∇J = 0, ∇g = θ⊗g. The first and last are
/// unconditional; the middle two hold exactly when J is integrable.
#[derive(Clone, Copy, Debug)]
pub struct WeylResiduals {
    pub torsion: f64,
    pub nabla_omega: f64,
    pub nabla_j: f64,
    pub nabla_g: f64,
}

/// Weyl connection ∇ = D − ½A with A(X,Y) = θ(X)Y + θ(Y)X − g(X,Y)θ♯.
#[derive(Clone, Debug)]
pub struct WeylData {
    /// A^a_{bc} = A(E_b, E_c)^a.
    pub a: TensorValue,
    /// Connection coefficients Γ^∇, slots [c, a, b] with a the direction.
    pub gamma: TensorValue,
    pub residuals: WeylResiduals,
}

pub fn weyl(bundle: &PointBundle, lee: &LeeForm, conn: &ConnectionCoefficients) -> WeylData {
    let d = bundle.dim;
    let ctx = &bundle.ctx;
    let theta = &lee.theta;
    let theta_sharp = sharp(bundle, theta);

    let a = TensorValue::from_fn(ctx, d, &[Up, Down, Down], |idx| {
        let (out, x, y) = (idx[0], idx[1], idx[2]);
        let mut acc = ctx.zero();
        if out == y {
            acc = &acc + theta.get(&[x]);
        }
        if out == x {
            acc = &acc + theta.get(&[y]);
        }
        acc = &acc - &(bundle.g.get(&[x, y]) * theta_sharp.get(&[out]));
        acc
    });
    let gamma = conn.gamma.sub(&a.scale(0.5));

    // Torsion: antisymmetric part of the coefficients.
    let mut torsion = 0.0f64;
    for c in 0..d {
        for x in 0..d {
            for y in 0..d {
                torsion = torsion
                    .max((gamma.get(&[c, x, y]).value() - gamma.get(&[c, y, x]).value()).abs());
            }
        }
    }
    // ∇ω = θ⊗ω.
    let n_omega = cov_deriv_two_form(&bundle.omega, &gamma);
    let mut nabla_omega = 0.0f64;
    for c in 0..d {
        for x in 0..d {
            for y in 0..d {
                let want = theta.get(&[c]).value() * bundle.omega.get(&[x, y]).value();
                nabla_omega = nabla_omega.max((n_omega.get(&[c, x, y]).value() - want).abs());
            }
        }
    }
    // ∇J = 0.
    let n_j = cov_deriv_endo(&bundle.j, &gamma);
    let nabla_j = n_j.value_norm_inf();
    // ∇g = θ⊗g.
    let n_g = cov_deriv_two_form(&bundle.g, &gamma);
    let mut nabla_g = 0.0f64;
    for c in 0..d {
        for x in 0..d {
            for y in 0..d {
                let want = theta.get(&[c]).value() * bundle.g.get(&[x, y]).value();
                nabla_g = nabla_g.max((n_g.get(&[c, x, y]).value() - want).abs());
            }
        }
    }

    WeylData {
        a,
        gamma,
        residuals: WeylResiduals {
            torsion,
            nabla_omega,
            nabla_j,
            nabla_g,
        },
    }
}

/// Residuals of the Chern-connection identities. All assume integrable J.
#[derive(Clone, Copy, Debug, Default)]
pub struct ChernResiduals {
    pub nabla_g: f64,
    pub nabla_j: f64,
    /// J T^Ch(X,Y) = T^Ch(JX, Y) and = T^Ch(X, JY).
    pub torsion_j_left: f64,
    pub torsion_j_right: f64,
    /// Torsion against the closed form ½(θ(X)Y − θ(Y)X − θ(JX)JY + θ(JY)JX).
    pub torsion_closed_form: f64,
    /// A^Ch against dω(JX, Y, ·)♯.
    pub a_ch_from_domega: f64,
    /// DJ identity.
    pub dj: f64,
    /// ∇^Ch T^Ch expansion.
    pub nabla_t_ch: f64,
    /// d*ω = −(n−1) Jθ.
    pub dstar_omega: f64,
}

/// Chern connection ∇^Ch = D − ½A^Ch with
/// A^Ch(X,Y) = θ(JX)JY + θ(Y)X − g(X,Y)θ♯, its torsion, curvature and the
/// two scalar traces.
#[derive(Clone, Debug)]
pub struct ChernData {
    pub a_ch: TensorValue,
    pub gamma: TensorValue,
    /// T^Ch(E_b, E_c)^a at slots [a, b, c].
    pub t_ch: TensorValue,
    /// Ω^Ch curvature, slots as in `curvature_tensor`.
    pub omega_ch: TensorValue,
    /// Real trace of Ω^Ch over an orthonormal frame.
    pub scal_tilde: Jet,
    /// Chern scalar curvature (unitary-frame double trace, assembled
    /// frame-freely through g⁻¹ and J contractions).
    pub scal_ch: Jet,
    pub residuals: ChernResiduals,
}

pub fn chern(bundle: &PointBundle, lee: &LeeForm, conn: &ConnectionCoefficients) -> ChernData {
    let d = bundle.dim;
    let n_half = d / 2;
    let ctx = &bundle.ctx;
    let theta = &lee.theta;
    let theta_sharp = sharp(bundle, theta);
    let jm = &bundle.j;

    // (θJ)_b = θ_e J^e_b.
    let theta_j = TensorValue::from_fn(ctx, d, &[Down], |idx| {
        let b = idx[0];
        let mut acc = ctx.zero();
        for e in 0..d {
            acc = &acc + &(theta.get(&[e]) * jm.get(&[e, b]));
        }
        acc
    });

    let a_ch = TensorValue::from_fn(ctx, d, &[Up, Down, Down], |idx| {
        let (out, x, y) = (idx[0], idx[1], idx[2]);
        let mut acc = theta_j.get(&[x]) * jm.get(&[out, y]);
        if out == x {
            acc = &acc + theta.get(&[y]);
        }
        acc = &acc - &(bundle.g.get(&[x, y]) * theta_sharp.get(&[out]));
        acc
    });
    let gamma = conn.gamma.sub(&a_ch.scale(0.5));

    // T^Ch from the coefficients.
    let t_ch = TensorValue::from_fn(ctx, d, &[Up, Down, Down], |idx| {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        gamma.get(&[a, b, c]) - gamma.get(&[a, c, b])
    });

    // Closed form ½(θ(X)Y − θ(Y)X − θ(JX)JY + θ(JY)JX).
    let t_closed = TensorValue::from_fn(ctx, d, &[Up, Down, Down], |idx| {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        let mut acc = ctx.zero();
        if a == c {
            acc = &acc + theta.get(&[b]);
        }
        if a == b {
            acc = &acc - theta.get(&[c]);
        }
        acc = &acc - &(theta_j.get(&[b]) * jm.get(&[a, c]));
        acc = &acc + &(theta_j.get(&[c]) * jm.get(&[a, b]));
        acc.scale(0.5)
    });
    let torsion_closed_form = t_ch.sub(&t_closed).value_norm_inf();

    // A^Ch = dω(JX, Y, _)♯ consistency.
    let domega = bundle.d_omega();
    let mut a_ch_from_domega = 0.0f64;
    for out in 0..d {
        for x in 0..d {
            for y in 0..d {
                let mut acc = 0.0;
                for f in 0..d {
                    for e in 0..d {
                        acc += bundle.g_inv.get(&[out, e]).value()
                            * jm.get(&[f, x]).value()
                            * domega.get(&[f, y, e]).value();
                    }
                }
                a_ch_from_domega =
                    a_ch_from_domega.max((acc - a_ch.get(&[out, x, y]).value()).abs());
            }
        }
    }

    // ∇^Ch g and ∇^Ch J.
    let n_g = cov_deriv_two_form(&bundle.g, &gamma);
    let nabla_g = n_g.value_norm_inf();
    let n_j = cov_deriv_endo(jm, &gamma);
    let nabla_j = n_j.value_norm_inf();

    // Torsion J-relations.
    let mut torsion_j_left = 0.0f64;
    let mut torsion_j_right = 0.0f64;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let mut jt = 0.0;
                let mut tj_left = 0.0;
                let mut tj_right = 0.0;
                for e in 0..d {
                    jt += jm.get(&[a, e]).value() * t_ch.get(&[e, b, c]).value();
                    tj_left += t_ch.get(&[a, e, c]).value() * jm.get(&[e, b]).value();
                    tj_right += t_ch.get(&[a, b, e]).value() * jm.get(&[e, c]).value();
                }
                torsion_j_left = torsion_j_left.max((jt - tj_left).abs());
                torsion_j_right = torsion_j_right.max((jt - tj_right).abs());
            }
        }
    }

    // Curvature and the two scalar traces.
    let omega_ch = curvature_tensor(&gamma);
    // Lowered curvature L_{bcde} = g_{ae} Ω^a_{bcd}.
    let lowered = TensorValue::from_fn(ctx, d, &[Down, Down, Down, Down], |idx| {
        let (b, c, dd, e) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = ctx.zero();
        for a in 0..d {
            acc = &acc + &(bundle.g.get(&[a, e]) * omega_ch.get(&[a, b, c, dd]));
        }
        acc
    });
    let mut scal_tilde = ctx.zero();
    let mut scal_ch = ctx.zero();
    // gJ^{bc} = g^{bf} J^c_f.
    let gj = TensorValue::from_fn(ctx, d, &[Up, Up], |idx| {
        let (b, c) = (idx[0], idx[1]);
        let mut acc = ctx.zero();
        for f in 0..d {
            acc = &acc + &(bundle.g_inv.get(&[b, f]) * jm.get(&[c, f]));
        }
        acc
    });
    for b in 0..d {
        for c in 0..d {
            for dd in 0..d {
                for e in 0..d {
                    let l = lowered.get(&[b, c, dd, e]);
                    scal_tilde = &scal_tilde
                        + &(&(bundle.g_inv.get(&[b, dd]) * bundle.g_inv.get(&[c, e])) * l);
                    scal_ch = &scal_ch + &(&(gj.get(&[b, c]) * gj.get(&[dd, e])) * l).scale(0.5);
                }
            }
        }
    }

    // DJ identity: (D_Y J)(X) = ½(θ(JX)Y − θ(X)JY − g(JX,Y)θ♯ + g(X,Y)Jθ♯).
    let dj_tensor = cov_deriv_endo(jm, &conn.gamma);
    let j_theta_sharp = TensorValue::from_fn(ctx, d, &[Up], |idx| {
        let a = idx[0];
        let mut acc = ctx.zero();
        for e in 0..d {
            acc = &acc + &(jm.get(&[a, e]) * theta_sharp.get(&[e]));
        }
        acc
    });
    let mut dj = 0.0f64;
    for y in 0..d {
        for a in 0..d {
            for x in 0..d {
                let mut want = ctx.zero();
                if a == y {
                    want = &want + theta_j.get(&[x]);
                }
                want = &want - &(theta.get(&[x]) * jm.get(&[a, y]));
                let mut gjxy = ctx.zero();
                for e in 0..d {
                    gjxy = &gjxy + &(jm.get(&[e, x]) * bundle.g.get(&[e, y]));
                }
                want = &want - &(&gjxy * theta_sharp.get(&[a]));
                want = &want + &(bundle.g.get(&[x, y]) * j_theta_sharp.get(&[a]));
                let got = dj_tensor.get(&[y, a, x]);
                dj = dj.max((got.value() - 0.5 * want.value()).abs());
            }
        }
    }

    // ∇^Ch T^Ch expansion.
    let dtheta_cov = cov_deriv_covector(theta, &conn.gamma);
    let nabla_t = crate::riemannian::cov_deriv_one_two(&t_ch, &gamma);
    let norm_theta_sq = pair(theta, &theta_sharp);
    let mut nabla_t_ch = 0.0f64;
    for z in 0..d {
        for b in 0..d {
            for c in 0..d {
                for w in 0..d {
                    // LHS: 2 g_{aw}(∇^Ch_z T^Ch)^a_{bc}.
                    let mut lhs = 0.0;
                    for a in 0..d {
                        lhs += 2.0
                            * bundle.g.get(&[a, w]).value()
                            * nabla_t.get(&[z, a, b, c]).value();
                    }
                    let th = |i: usize| theta.get(&[i]).value();
                    let thj = |i: usize| theta_j.get(&[i]).value();
                    let gv = |i: usize, k: usize| bundle.g.get(&[i, k]).value();
                    let dth = |i: usize, k: usize| dtheta_cov.get(&[i, k]).value();
                    let jv = |i: usize, k: usize| jm.get(&[i, k]).value();
                    let nt2 = norm_theta_sq.value();
                    let gjw = |i: usize| -> f64 {
                        (0..d).map(|e| jv(e, i) * gv(e, w)).sum()
                    };
                    let dth_j = |z: usize, i: usize| -> f64 {
                        (0..d).map(|e| dth(z, e) * jv(e, i)).sum()
                    };
                    let gj = |i: usize, k: usize| -> f64 {
                        (0..d).map(|e| jv(e, i) * gv(e, k)).sum()
                    };
                    let mut rhs = 0.0;
                    rhs += -dth(z, c) * gv(b, w)
                        - 0.5 * (th(c) * th(z) + thj(c) * thj(z) - nt2 * gv(c, z)) * gv(b, w);
                    rhs += dth(z, b) * gv(c, w)
                        + 0.5 * (th(b) * th(z) + thj(b) * thj(z) - nt2 * gv(b, z)) * gv(c, w);
                    rhs += dth_j(z, c) * gjw(b)
                        + 0.5 * (thj(c) * th(z) - th(c) * thj(z) - nt2 * gj(c, z)) * gjw(b);
                    rhs += -dth_j(z, b) * gjw(c)
                        - 0.5 * (thj(b) * th(z) - th(b) * thj(z) - nt2 * gj(b, z)) * gjw(c);
                    nabla_t_ch = nabla_t_ch.max((lhs - rhs).abs());
                }
            }
        }
    }

    // d*ω = −(n−1) Jθ with Jθ = θ∘J⁻¹ = −θ∘J.
    let dstar_om = crate::riemannian::codiff_two_form(bundle, conn, &bundle.omega);
    let mut dstar_omega = 0.0f64;
    for a in 0..d {
        let want = -((n_half as f64) - 1.0) * (-theta_j.get(&[a]).value());
        dstar_omega = dstar_omega.max((dstar_om.get(&[a]).value() - want).abs());
    }

    ChernData {
        a_ch,
        gamma,
        t_ch,
        omega_ch,
        scal_tilde,
        scal_ch,
        residuals: ChernResiduals {
            nabla_g,
            nabla_j,
            torsion_j_left,
            torsion_j_right,
            torsion_closed_form,
            a_ch_from_domega,
            dj,
            nabla_t_ch,
            dstar_omega,
        },
    }
}

/// Weyl curvature Ω^∇ = ∇_{[X,Y]} − [∇_X, ∇_Y] with its Ricci trace and the
/// property residuals of the curvature lemma.
#[derive(Clone, Debug)]
pub struct WeylCurvature {
    pub omega_nabla: TensorValue,
    pub ric_nabla: TensorValue,
    pub bianchi: f64,
    pub skew: f64,
    pub j_commute: f64,
    pub one_one_type: f64,
    pub ric_symmetric: f64,
    pub ric_j_invariant: f64,
}

pub fn weyl_curvature(bundle: &PointBundle, weyl: &WeylData) -> WeylCurvature {
    let d = bundle.dim;
    let ctx = &bundle.ctx;
    let om = curvature_tensor(&weyl.gamma);
    let ric = TensorValue::from_fn(ctx, d, &[Down, Down], |idx| {
        let (b, dd) = (idx[0], idx[1]);
        let mut acc = ctx.zero();
        for c in 0..d {
            acc = &acc + om.get(&[c, b, c, dd]);
        }
        acc
    });

    let scale = om.value_norm_inf().max(1.0);
    let mut bianchi = 0.0f64;
    let mut skew = 0.0f64;
    let mut j_commute = 0.0f64;
    let mut one_one = 0.0f64;
    let jm = &bundle.j;
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let v = om.get(&[a, b, c, e]).value()
                        + om.get(&[a, c, e, b]).value()
                        + om.get(&[a, e, b, c]).value();
                    bianchi = bianchi.max(v.abs());

                    // skew: g(Ω(b,c)e, w) + g(e, Ω(b,c)w): symmetrized lowered tensor.
                    let mut s = 0.0;
                    for f in 0..d {
                        s += bundle.g.get(&[f, e]).value() * om.get(&[f, b, c, a]).value()
                            + bundle.g.get(&[f, a]).value() * om.get(&[f, b, c, e]).value();
                    }
                    skew = skew.max(s.abs());

                    // J-commutation: Ω^a_{bce} J^e_d − J^a_e Ω^e_{bcd} with d := e slot.
                    let mut jc = 0.0;
                    for f in 0..d {
                        jc += om.get(&[a, b, c, f]).value() * jm.get(&[f, e]).value()
                            - jm.get(&[a, f]).value() * om.get(&[f, b, c, e]).value();
                    }
                    j_commute = j_commute.max(jc.abs());

                    // (1,1)-type: Ω(Jb, Jc) = Ω(b, c).
                    let mut oo = -om.get(&[a, b, c, e]).value();
                    for f in 0..d {
                        for h in 0..d {
                            oo += om.get(&[a, f, h, e]).value()
                                * jm.get(&[f, b]).value()
                                * jm.get(&[h, c]).value();
                        }
                    }
                    one_one = one_one.max(oo.abs());
                }
            }
        }
    }

    let mut ric_symmetric = 0.0f64;
    let mut ric_j_invariant = 0.0f64;
    let ric_scale = ric.value_norm_inf().max(1.0);
    for b in 0..d {
        for e in 0..d {
            ric_symmetric =
                ric_symmetric.max((ric.get(&[b, e]).value() - ric.get(&[e, b]).value()).abs());
            let mut rj = -ric.get(&[b, e]).value();
            for f in 0..d {
                for h in 0..d {
                    rj += ric.get(&[f, h]).value() * jm.get(&[f, b]).value() * jm.get(&[h, e]).value();
                }
            }
            ric_j_invariant = ric_j_invariant.max(rj.abs());
        }
    }

    WeylCurvature {
        omega_nabla: om,
        ric_nabla: ric,
        bianchi: bianchi / scale,
        skew: skew / scale,
        j_commute: j_commute / scale,
        one_one_type: one_one / scale,
        ric_symmetric: ric_symmetric / ric_scale,
        ric_j_invariant: ric_j_invariant / ric_scale,
    }
}

/// Both expressions of the moment-map integrand:
/// `mu_chern = scal^Ch + n d*θ` (integrable J only) and the extension
/// `mu_extended = scal + d*θ + (n−1)/2 |θ|²` valid for any compatible J.
#[derive(Clone, Debug)]
pub struct MuValues {
    pub mu_chern: Option<Jet>,
    pub mu_extended: Jet,
    pub scal: Jet,
    pub dstar_theta: Jet,
    pub norm_theta_sq: Jet,
}

pub fn mu(
    bundle: &PointBundle,
    lee: &LeeForm,
    conn: &ConnectionCoefficients,
    chern_data: Option<&ChernData>,
) -> Result<MuValues> {
    let n_half = (bundle.dim / 2) as f64;
    let curv = crate::riemannian::curvature(bundle, conn);
    let dstar_theta = codiff_one_form(bundle, conn, &lee.theta);
    let norm_theta_sq = pair(&lee.theta, &sharp(bundle, &lee.theta));
    let mu_extended = &(&curv.scal + &dstar_theta) + &norm_theta_sq.scale((n_half - 1.0) / 2.0);
    let mu_chern = match chern_data {
        Some(ch) => {
            if bundle.nijenhuis_residual() > INTEGRABILITY_TOL {
                return Err(Error::Hypothesis(
                    "mu_chern requires an integrable complex structure".into(),
                ));
            }
            Some(&ch.scal_ch + &dstar_theta.scale(n_half))
        }
        None => None,
    };
    Ok(MuValues {
        mu_chern,
        mu_extended,
        scal: curv.scal,
        dstar_theta,
        norm_theta_sq,
    })
}
