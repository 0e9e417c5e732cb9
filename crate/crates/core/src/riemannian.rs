//! Levi-Civita connection and the Riemannian operators used throughout:
//! curvature with the convention Rm(X,Y) = D_{[X,Y]} − [D_X, D_Y], Ricci and
//! scalar traces, divergence δ on symmetric endomorphism fields, δ*, exterior
//! and twisted differentials, codifferentials and Lie derivatives.
//!
//! Frame sums are evaluated frame-freely through g⁻¹ contractions; an
//! orthonormal-frame implementation exists only as a test oracle.

use crate::error::{Error, Result};
use crate::geometry::PointBundle;
use crate::jet::Jet;
use crate::tensor::{Down, TensorValue, Up};

/// Christoffel symbols Γ^c_{ab} of a metric at a point, stored as the (1,2)
/// tensor slot order [c, a, b] with a the differentiation direction.
#[derive(Clone, Debug)]
pub struct ConnectionCoefficients {
    pub gamma: TensorValue,
    pub symmetry_residual: f64,
    pub metricity_residual: f64,
}

/// Γ^c_{ab} = ½ g^{cd}(∂_a g_bd + ∂_b g_ad − ∂_d g_ab).
pub fn levi_civita(bundle: &PointBundle) -> Result<ConnectionCoefficients> {
    let d = bundle.dim;
    let ctx = &bundle.ctx;
    let gamma = TensorValue::from_fn(ctx, d, &[Up, Down, Down], |idx| {
        let (c, a, b) = (idx[0], idx[1], idx[2]);
        let mut acc = ctx.zero();
        for e in 0..d {
            let t = &(&bundle.g.get(&[b, e]).partial(a) + &bundle.g.get(&[a, e]).partial(b))
                - &bundle.g.get(&[a, b]).partial(e);
            acc = &acc + &(bundle.g_inv.get(&[c, e]) * &t);
        }
        acc.scale(0.5)
    });

    let mut symmetry = 0.0f64;
    for c in 0..d {
        for a in 0..d {
            for b in a + 1..d {
                symmetry = symmetry
                    .max((gamma.get(&[c, a, b]).value() - gamma.get(&[c, b, a]).value()).abs());
            }
        }
    }
    let coeffs = ConnectionCoefficients {
        gamma,
        symmetry_residual: symmetry,
        metricity_residual: 0.0,
    };
    let dg = cov_deriv_two_form(&bundle.g, &coeffs.gamma);
    let metricity = dg.value_norm_inf();
    if metricity > 1e-10 || symmetry > 1e-11 {
        return Err(Error::Compatibility {
            check: "levi-civita metricity/symmetry",
            residual: metricity.max(symmetry),
        });
    }
    Ok(ConnectionCoefficients {
        metricity_residual: metricity,
        ..coeffs
    })
}

/// Covariant derivative of a vector field: (∇_a X)^b, slots [b, a].
pub fn cov_deriv_vector(x: &TensorValue, gamma: &TensorValue) -> TensorValue {
    let d = x.dim();
    let ctx = x.comps()[0].context().clone();
    TensorValue::from_fn(&ctx, d, &[Up, Down], |idx| {
        let (b, a) = (idx[0], idx[1]);
        let mut acc = x.get(&[b]).partial(a);
        for e in 0..d {
            acc = &acc + &(gamma.get(&[b, a, e]) * x.get(&[e]));
        }
        acc
    })
}

/// Covariant derivative of a covector: (∇_a ζ)_b, slots [a, b].
pub fn cov_deriv_covector(zeta: &TensorValue, gamma: &TensorValue) -> TensorValue {
    let d = zeta.dim();
    let ctx = zeta.comps()[0].context().clone();
    TensorValue::from_fn(&ctx, d, &[Down, Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        let mut acc = zeta.get(&[b]).partial(a);
        for e in 0..d {
            acc = &acc - &(gamma.get(&[e, a, b]) * zeta.get(&[e]));
        }
        acc
    })
}

/// Covariant derivative of a (0,2) tensor: (∇_c T)_{ab}, slots [c, a, b].
pub fn cov_deriv_two_form(t: &TensorValue, gamma: &TensorValue) -> TensorValue {
    let d = t.dim();
    let ctx = t.comps()[0].context().clone();
    TensorValue::from_fn(&ctx, d, &[Down, Down, Down], |idx| {
        let (c, a, b) = (idx[0], idx[1], idx[2]);
        let mut acc = t.get(&[a, b]).partial(c);
        for e in 0..d {
            acc = &acc - &(gamma.get(&[e, c, a]) * t.get(&[e, b]));
            acc = &acc - &(gamma.get(&[e, c, b]) * t.get(&[a, e]));
        }
        acc
    })
}

/// Covariant derivative of an endomorphism: (∇_c u)^a_b, slots [c, a, b].
pub fn cov_deriv_endo(u: &TensorValue, gamma: &TensorValue) -> TensorValue {
    let d = u.dim();
    let ctx = u.comps()[0].context().clone();
    TensorValue::from_fn(&ctx, d, &[Down, Up, Down], |idx| {
        let (c, a, b) = (idx[0], idx[1], idx[2]);
        let mut acc = u.get(&[a, b]).partial(c);
        for e in 0..d {
            acc = &acc + &(gamma.get(&[a, c, e]) * u.get(&[e, b]));
            acc = &acc - &(gamma.get(&[e, c, b]) * u.get(&[a, e]));
        }
        acc
    })
}

/// Covariant derivative of a (1,2) tensor T^a_{bc}: slots [d, a, b, c].
pub fn cov_deriv_one_two(t: &TensorValue, gamma: &TensorValue) -> TensorValue {
    let d = t.dim();
    let ctx = t.comps()[0].context().clone();
    TensorValue::from_fn(&ctx, d, &[Down, Up, Down, Down], |idx| {
        let (dir, a, b, c) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = t.get(&[a, b, c]).partial(dir);
        for e in 0..d {
            acc = &acc + &(gamma.get(&[a, dir, e]) * t.get(&[e, b, c]));
            acc = &acc - &(gamma.get(&[e, dir, b]) * t.get(&[a, e, c]));
            acc = &acc - &(gamma.get(&[e, dir, c]) * t.get(&[a, b, e]));
        }
        acc
    })
}

/// Riemannian curvature in the paper-fixed sign: Rm(X,Y) = D_{[X,Y]} − [D_X, D_Y].
#[derive(Clone, Debug)]
pub struct CurvatureBundle {
    /// R^a_{bcd} with Rm(E_b, E_c) E_d = R^a_{bcd} E_a.
    pub rm: TensorValue,
    /// Ric(X,Y) = tr(Z ↦ Rm(X,Z)Y).
    pub ric: TensorValue,
    /// scal = tr(Ric♯).
    pub scal: Jet,
    pub bianchi_residual: f64,
}

/// Curvature of an arbitrary coefficient field (shared by the Levi-Civita,
/// Weyl and Chern connections): Ω^a_{bcd} with Ω(E_b,E_c)E_d = Ω^a_{bcd}E_a.
pub fn curvature_tensor(gamma: &TensorValue) -> TensorValue {
    let d = gamma.dim();
    let ctx = gamma.comps()[0].context().clone();
    TensorValue::from_fn(&ctx, d, &[Up, Down, Down, Down], |idx| {
        let (a, b, c, dd) = (idx[0], idx[1], idx[2], idx[3]);
        let mut acc = &gamma.get(&[a, b, dd]).partial(c) - &gamma.get(&[a, c, dd]).partial(b);
        for e in 0..d {
            acc = &acc - &(gamma.get(&[e, c, dd]) * gamma.get(&[a, b, e]));
            acc = &acc + &(gamma.get(&[e, b, dd]) * gamma.get(&[a, c, e]));
        }
        acc
    })
}

pub fn curvature(bundle: &PointBundle, conn: &ConnectionCoefficients) -> CurvatureBundle {
    let d = bundle.dim;
    let rm = curvature_tensor(&conn.gamma);
    // Ric_{bd} = R^c_{bcd}: trace output slot against the second form slot.
    let ric = TensorValue::from_fn(&bundle.ctx, d, &[Down, Down], |idx| {
        let (b, dd) = (idx[0], idx[1]);
        let mut acc = bundle.ctx.zero();
        for c in 0..d {
            acc = &acc + rm.get(&[c, b, c, dd]);
        }
        acc
    });
    let mut scal = bundle.ctx.zero();
    for b in 0..d {
        for e in 0..d {
            scal = &scal + &(bundle.g_inv.get(&[b, e]) * ric.get(&[b, e]));
        }
    }
    // First Bianchi: Rm(X,Y)Z + Rm(Y,Z)X + Rm(Z,X)Y = 0.
    let mut bianchi = 0.0f64;
    let mut scale = rm.value_norm_inf().max(1.0);
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let v = rm.get(&[a, b, c, e]).value()
                        + rm.get(&[a, c, e, b]).value()
                        + rm.get(&[a, e, b, c]).value();
                    bianchi = bianchi.max(v.abs());
                }
            }
        }
    }
    scale = scale.max(1.0);
    CurvatureBundle {
        rm,
        ric,
        scal,
        bianchi_residual: bianchi / scale,
    }
}

/// ζ♯: raise a covector with g⁻¹.
pub fn sharp(bundle: &PointBundle, zeta: &TensorValue) -> TensorValue {
    let d = bundle.dim;
    TensorValue::from_fn(&bundle.ctx, d, &[Up], |idx| {
        let a = idx[0];
        let mut acc = bundle.ctx.zero();
        for b in 0..d {
            acc = &acc + &(bundle.g_inv.get(&[a, b]) * zeta.get(&[b]));
        }
        acc
    })
}

/// X♭: lower a vector with g.
pub fn flat(bundle: &PointBundle, x: &TensorValue) -> TensorValue {
    let d = bundle.dim;
    TensorValue::from_fn(&bundle.ctx, d, &[Down], |idx| {
        let a = idx[0];
        let mut acc = bundle.ctx.zero();
        for b in 0..d {
            acc = &acc + &(bundle.g.get(&[a, b]) * x.get(&[b]));
        }
        acc
    })
}

/// Pairing ζ(X) of a covector with a vector.
pub fn pair(zeta: &TensorValue, x: &TensorValue) -> Jet {
    let d = x.dim();
    let mut acc = x.comps()[0].context().zero();
    for a in 0..d {
        acc = &acc + &(zeta.get(&[a]) * x.get(&[a]));
    }
    acc
}

/// g-inner product of endomorphisms: ⟨u, v⟩ = g_{ac} g^{bd} u^a_b v^c_d.
pub fn endo_inner(bundle: &PointBundle, u: &TensorValue, v: &TensorValue) -> Jet {
    let d = bundle.dim;
    let mut acc = bundle.ctx.zero();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let t = &(bundle.g.get(&[a, c]) * bundle.g_inv.get(&[b, e]))
                        * &(u.get(&[a, b]) * v.get(&[c, e]));
                    acc = &acc + &t;
                }
            }
        }
    }
    acc
}

/// g-transpose of an endomorphism: (uᵀ)^a_b = g^{ac} u^d_c g_{db}.
pub fn g_transpose(bundle: &PointBundle, u: &TensorValue) -> TensorValue {
    let d = bundle.dim;
    TensorValue::from_fn(&bundle.ctx, d, &[Up, Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        let mut acc = bundle.ctx.zero();
        for c in 0..d {
            for e in 0..d {
                acc = &acc
                    + &(&(bundle.g_inv.get(&[a, c]) * u.get(&[e, c])) * bundle.g.get(&[e, b]));
            }
        }
        acc
    })
}

/// Sym_g(u) = ½(u + uᵀ).
pub fn sym_g(bundle: &PointBundle, u: &TensorValue) -> TensorValue {
    u.add(&g_transpose(bundle, u)).scale(0.5)
}

/// max |g(uX, Y) − g(X, uY)| at the point: symmetry defect of an endomorphism.
pub fn g_symmetry_residual(bundle: &PointBundle, u: &TensorValue) -> f64 {
    let d = bundle.dim;
    let mut r: f64 = 0.0;
    for b in 0..d {
        for c in 0..d {
            // (g u)_{bc} vs (g u)_{cb}
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for a in 0..d {
                s1 += bundle.g.get(&[b, a]).value() * u.get(&[a, c]).value();
                s2 += bundle.g.get(&[c, a]).value() * u.get(&[a, b]).value();
            }
            r = r.max((s1 - s2).abs());
        }
    }
    r
}

/// Divergence of a symmetric endomorphism field: (δu)_b = −(D_a u)^a_b.
///
/// Equals the orthonormal-frame sum −Σ g((D_{ẽ_α}u)(X), ẽ_α) evaluated
/// frame-freely. Rejects inputs that are not g-symmetric.
pub fn delta_sym_endo(
    bundle: &PointBundle,
    conn: &ConnectionCoefficients,
    u: &TensorValue,
) -> Result<TensorValue> {
    let sym_defect = g_symmetry_residual(bundle, u);
    let scale = u.value_norm_inf().max(1.0);
    if sym_defect / scale > 1e-8 {
        return Err(Error::Compatibility {
            check: "delta input symmetry",
            residual: sym_defect,
        });
    }
    Ok(delta_endo_unchecked(bundle, conn, u))
}

/// The same contraction without the symmetry gate (used internally where the
/// input is symmetric by construction).
pub fn delta_endo_unchecked(
    bundle: &PointBundle,
    conn: &ConnectionCoefficients,
    u: &TensorValue,
) -> TensorValue {
    let d = bundle.dim;
    let du = cov_deriv_endo(u, &conn.gamma);
    TensorValue::from_fn(&bundle.ctx, d, &[Down], |idx| {
        let b = idx[0];
        let mut acc = bundle.ctx.zero();
        for a in 0..d {
            acc = &acc - du.get(&[a, a, b]);
        }
        acc
    })
}

/// d of a scalar: (df)_a = ∂_a f.
pub fn d_scalar(bundle: &PointBundle, f: &Jet) -> TensorValue {
    TensorValue::from_fn(&bundle.ctx, bundle.dim, &[Down], |idx| f.partial(idx[0]))
}

/// Twisted differential of a scalar: d_θ f = df − f θ.
pub fn d_theta_scalar(bundle: &PointBundle, f: &Jet, theta: &TensorValue) -> TensorValue {
    d_scalar(bundle, f).sub(&theta.scale_jet(f))
}

/// d of a 1-form: (dζ)_{ab} = ∂_a ζ_b − ∂_b ζ_a.
pub fn d_one_form(bundle: &PointBundle, zeta: &TensorValue) -> TensorValue {
    let d = bundle.dim;
    TensorValue::from_fn(&bundle.ctx, d, &[Down, Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        &zeta.get(&[b]).partial(a) - &zeta.get(&[a]).partial(b)
    })
}

/// Twisted differential of a 1-form: d_θ ζ = dζ − θ∧ζ.
pub fn d_theta_one_form(
    bundle: &PointBundle,
    zeta: &TensorValue,
    theta: &TensorValue,
) -> TensorValue {
    let d = bundle.dim;
    let dz = d_one_form(bundle, zeta);
    TensorValue::from_fn(&bundle.ctx, d, &[Down, Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        let wedge = &(theta.get(&[a]) * zeta.get(&[b])) - &(theta.get(&[b]) * zeta.get(&[a]));
        dz.get(&[a, b]) - &wedge
    })
}

/// Twisted differential of a 2-form: d_θ β = dβ − θ∧β.
pub fn d_theta_two_form(
    bundle: &PointBundle,
    beta: &TensorValue,
    theta: &TensorValue,
) -> TensorValue {
    let d = bundle.dim;
    TensorValue::from_fn(&bundle.ctx, d, &[Down, Down, Down], |idx| {
        let (a, b, c) = (idx[0], idx[1], idx[2]);
        let db = &(&beta.get(&[b, c]).partial(a) + &beta.get(&[c, a]).partial(b))
            + &beta.get(&[a, b]).partial(c);
        let wedge = &(&(theta.get(&[a]) * beta.get(&[b, c]))
            + &(theta.get(&[b]) * beta.get(&[c, a])))
            + &(theta.get(&[c]) * beta.get(&[a, b]));
        &db - &wedge
    })
}

/// Codifferential of a 1-form: d*ζ = −tr(D(ζ♯)).
pub fn codiff_one_form(
    bundle: &PointBundle,
    conn: &ConnectionCoefficients,
    zeta: &TensorValue,
) -> Jet {
    let zs = sharp(bundle, zeta);
    let dzs = cov_deriv_vector(&zs, &conn.gamma);
    let d = bundle.dim;
    let mut acc = bundle.ctx.zero();
    for a in 0..d {
        acc = &acc - dzs.get(&[a, a]);
    }
    acc
}

/// Codifferential of a 2-form: (d*β)_c = −g^{ab} (D_a β)_{bc}.
pub fn codiff_two_form(
    bundle: &PointBundle,
    conn: &ConnectionCoefficients,
    beta: &TensorValue,
) -> TensorValue {
    let d = bundle.dim;
    let db = cov_deriv_two_form(beta, &conn.gamma);
    TensorValue::from_fn(&bundle.ctx, d, &[Down], |idx| {
        let c = idx[0];
        let mut acc = bundle.ctx.zero();
        for a in 0..d {
            for b in 0..d {
                acc = &acc - &(bundle.g_inv.get(&[a, b]) * db.get(&[a, b, c]));
            }
        }
        acc
    })
}

/// δ*ζ computed along both routes:
/// the Levi-Civita form D(ζ♯) − ½(·⌟dζ)♯ and, when the Weyl coefficients are
/// supplied, the twisted form ∇(ζ♯) − ½(·⌟d_θζ)♯ + ½ g(ζ,θ) Id. The two must
/// agree; the max disagreement is returned alongside the operator.
pub fn delta_star(
    bundle: &PointBundle,
    conn: &ConnectionCoefficients,
    zeta: &TensorValue,
    weyl: Option<(&TensorValue, &TensorValue)>, // (weyl gamma, theta)
) -> (TensorValue, f64) {
    let d = bundle.dim;
    let zs = sharp(bundle, zeta);
    let dzs = cov_deriv_vector(&zs, &conn.gamma);
    let dz = d_one_form(bundle, zeta);
    let lc_form = TensorValue::from_fn(&bundle.ctx, d, &[Up, Down], |idx| {
        let (a, b) = (idx[0], idx[1]);
        let mut acc = dzs.get(&[a, b]).clone();
        for c in 0..d {
            acc = &acc - &(bundle.g_inv.get(&[a, c]) * &dz.get(&[b, c])).scale(0.5);
        }
        acc
    });
    let mut residual = 0.0;
    if let Some((weyl_gamma, theta)) = weyl {
        let nzs = cov_deriv_vector(&zs, weyl_gamma);
        let dtz = d_theta_one_form(bundle, zeta, theta);
        let ztheta = pair(zeta, &sharp(bundle, theta));
        let weyl_form = TensorValue::from_fn(&bundle.ctx, d, &[Up, Down], |idx| {
            let (a, b) = (idx[0], idx[1]);
            let mut acc = nzs.get(&[a, b]).clone();
            for c in 0..d {
                acc = &acc - &(bundle.g_inv.get(&[a, c]) * &dtz.get(&[b, c])).scale(0.5);
            }
            if a == b {
                acc = &acc + &ztheta.scale(0.5);
            }
            acc
        });
        let scale = lc_form.value_norm_inf().max(1.0);
        residual = lc_form.sub(&weyl_form).value_norm_inf() / scale;
    }
    (lc_form, residual)
}

/// Lie derivative of tensors up to rank 2, dispatched on the signature.
pub fn lie_derivative(bundle: &PointBundle, x: &TensorValue, t: &TensorValue) -> TensorValue {
    let d = bundle.dim;
    let ctx = &bundle.ctx;
    match t.sig() {
        [] => TensorValue::scalar(lie_scalar(bundle, x, &t.comps()[0])),
        [Up] => TensorValue::from_fn(ctx, d, &[Up], |idx| {
            let a = idx[0];
            let mut acc = ctx.zero();
            for c in 0..d {
                acc = &acc + &(x.get(&[c]) * &t.get(&[a]).partial(c));
                acc = &acc - &(t.get(&[c]) * &x.get(&[a]).partial(c));
            }
            acc
        }),
        [Down] => TensorValue::from_fn(ctx, d, &[Down], |idx| {
            let a = idx[0];
            let mut acc = ctx.zero();
            for c in 0..d {
                acc = &acc + &(x.get(&[c]) * &t.get(&[a]).partial(c));
                acc = &acc + &(t.get(&[c]) * &x.get(&[c]).partial(a));
            }
            acc
        }),
        [Down, Down] => TensorValue::from_fn(ctx, d, &[Down, Down], |idx| {
            let (a, b) = (idx[0], idx[1]);
            let mut acc = ctx.zero();
            for c in 0..d {
                acc = &acc + &(x.get(&[c]) * &t.get(&[a, b]).partial(c));
                acc = &acc + &(t.get(&[c, b]) * &x.get(&[c]).partial(a));
                acc = &acc + &(t.get(&[a, c]) * &x.get(&[c]).partial(b));
            }
            acc
        }),
        [Up, Down] => TensorValue::from_fn(ctx, d, &[Up, Down], |idx| {
            let (a, b) = (idx[0], idx[1]);
            let mut acc = ctx.zero();
            for c in 0..d {
                acc = &acc + &(x.get(&[c]) * &t.get(&[a, b]).partial(c));
                acc = &acc - &(t.get(&[c, b]) * &x.get(&[a]).partial(c));
                acc = &acc + &(t.get(&[a, c]) * &x.get(&[c]).partial(b));
            }
            acc
        }),
        other => panic!("lie_derivative: unsupported signature {:?}", other),
    }
}

pub fn lie_scalar(bundle: &PointBundle, x: &TensorValue, f: &Jet) -> Jet {
    let d = bundle.dim;
    let mut acc = bundle.ctx.zero();
    for c in 0..d {
        acc = &acc + &(x.get(&[c]) * &f.partial(c));
    }
    acc
}

/// Coordinate bracket [X, Y].
pub fn bracket(bundle: &PointBundle, x: &TensorValue, y: &TensorValue) -> TensorValue {
    lie_derivative(bundle, x, y)
}

/// Interior product X ⌟ β of a vector with a 2-form: (X⌟β)_b = X^a β_{ab}.
pub fn interior_two_form(bundle: &PointBundle, x: &TensorValue, beta: &TensorValue) -> TensorValue {
    let d = bundle.dim;
    TensorValue::from_fn(&bundle.ctx, d, &[Down], |idx| {
        let b = idx[0];
        let mut acc = bundle.ctx.zero();
        for a in 0..d {
            acc = &acc + &(x.get(&[a]) * beta.get(&[a, b]));
        }
        acc
    })
}

/// max |lhs − rhs| / max(‖lhs‖, ‖rhs‖, 1) over degree-0 components.
pub fn rel_residual(lhs: &TensorValue, rhs: &TensorValue) -> f64 {
    let scale = lhs.value_norm_inf().max(rhs.value_norm_inf()).max(1.0);
    lhs.sub(rhs).value_norm_inf() / scale
}

pub fn rel_residual_jet(lhs: &Jet, rhs: &Jet) -> f64 {
    let scale = lhs.value().abs().max(rhs.value().abs()).max(1.0);
    (lhs.value() - rhs.value()).abs() / scale
}
