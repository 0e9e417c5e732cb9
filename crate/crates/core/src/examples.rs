//! Built-in model geometries with analytic field definitions, torus actions,
//! potentials and deformation libraries.
//!
//! All fields are stored as expression trees and re-verified at load, so the
//! catalog exercises the same declarative path as user-supplied JSON charts.

use std::f64::consts::{LN_2, PI};

use crate::chart::{Axis, Chart, ChartParam, Conjugation};
use crate::deformation::DeformationField;
use crate::error::{Error, Result};
use crate::expr::{c, cos, div, mul, neg, pow, sin, x, Expr};

#[derive(Clone, Copy, Debug, Default)]
pub struct ExampleFlags {
    pub integrable: bool,
    pub vaisman: bool,
    pub kaehler: bool,
}

/// A regression value fixed by an independent derivation; the regression
/// suite recomputes it through the engine and fails on drift > 1e−8 relative.
#[derive(Clone, Debug)]
pub struct FrozenConstant {
    pub name: &'static str,
    pub value: f64,
    pub provenance: &'static str,
}

#[derive(Clone, Debug)]
pub struct ExampleCatalogEntry {
    pub name: String,
    pub chart: Chart,
    pub deformations: Vec<DeformationField>,
    pub flags: ExampleFlags,
    pub frozen: Vec<FrozenConstant>,
}

fn zero() -> Expr {
    c(0.0)
}

/// sin(η)·cos(η) with η the second coordinate.
fn sc() -> Expr {
    mul(sin(x(1)), cos(x(1)))
}

fn sin2() -> Expr {
    pow(sin(x(1)), 2.0)
}

fn cos2() -> Expr {
    pow(cos(x(1)), 2.0)
}

/// The standard (diagonal, deck scale 2) Hopf surface with its Vaisman
/// metric and the torus of coordinate rotations.
///
/// Coordinates (s, η, φ₁, φ₂) parametrize (ℂ²∖{0})/(z ∼ 2z) up to measure
/// zero through z = 2^s (sin η e^{iφ₁}, cos η e^{iφ₂}); the metric is
/// |z|⁻²·(flat) and J is the standard complex structure of ℂ². In these
/// coordinates
///   g = (ln2)² ds² + dη² + sin²η dφ₁² + cos²η dφ₂²,
///   ω = ln2 sin²η ds∧dφ₁ + ln2 cos²η ds∧dφ₂ + sc dη∧dφ₁ − sc dη∧dφ₂,
/// with sc = sinη·cosη, and the Lee form works out to −2 ln2 ds.
pub fn hopf_standard() -> ExampleCatalogEntry {
    let l2 = LN_2;
    let omega = vec![
        vec![zero(), zero(), mul(c(l2), sin2()), mul(c(l2), cos2())],
        vec![zero(), zero(), sc(), neg(sc())],
        vec![neg(mul(c(l2), sin2())), neg(sc()), zero(), zero()],
        vec![neg(mul(c(l2), cos2())), sc(), zero(), zero()],
    ];
    // Columns of J: J∂s = ln2(∂φ₁+∂φ₂); J∂η = cotη ∂φ₁ − tanη ∂φ₂;
    // J∂φ₁ = −sin²η/ln2 ∂s − sc ∂η; J∂φ₂ = −cos²η/ln2 ∂s + sc ∂η.
    let j = vec![
        vec![zero(), zero(), neg(div(sin2(), c(l2))), neg(div(cos2(), c(l2)))],
        vec![zero(), zero(), neg(sc()), sc()],
        vec![c(l2), div(cos(x(1)), sin(x(1))), zero(), zero()],
        vec![c(l2), neg(div(sin(x(1)), cos(x(1)))), zero(), zero()],
    ];
    let chart = Chart {
        name: "hopf_standard".into(),
        dim: 4,
        axes: vec![
            Axis { min: 0.0, max: 1.0, periodic: true },
            Axis { min: 0.0, max: PI / 2.0, periodic: false },
            Axis { min: 0.0, max: 2.0 * PI, periodic: true },
            Axis { min: 0.0, max: 2.0 * PI, periodic: true },
        ],
        omega,
        j,
        j_conjugation: None,
        generators: vec![
            vec![zero(), zero(), c(1.0), zero()],
            vec![zero(), zero(), zero(), c(1.0)],
        ],
        // h_i = −|z_i|²/(2|z|²), re-verified at load against k_i ⌟ ω = d_θ h_i.
        potentials: vec![
            Some(neg(div(sin2(), c(2.0)))),
            Some(neg(div(cos2(), c(2.0)))),
        ],
        lee_coefficients: vec![2.0, 2.0],
        params: vec![],
    };

    ExampleCatalogEntry {
        name: "hopf_standard".into(),
        chart,
        deformations: hopf_deformation_library(),
        flags: ExampleFlags {
            integrable: true,
            vaisman: true,
            kaehler: false,
        },
        frozen: vec![
            FrozenConstant {
                name: "norm_theta_sq",
                value: 4.0,
                provenance: "closed-form radial computation: |d log|z|^2|^2 under |z|^-2 flat",
            },
            FrozenConstant {
                name: "lee_s_period",
                value: -2.0 * LN_2,
                provenance: "s-loop integral of theta = -2 ln2 ds; non-exactness certificate",
            },
            FrozenConstant {
                name: "scal",
                value: 6.0,
                provenance: "conformal-change oracle: flat R^4 scaled by |z|^-2 in dim 4",
            },
            FrozenConstant {
                name: "scal_chern",
                value: 8.0,
                provenance: "scal - scal^Ch = (n-1) d*theta - (n-1)/2 |theta|^2 with d*theta = 0",
            },
            FrozenConstant {
                name: "mu",
                value: 8.0,
                provenance: "scal^Ch + n d*theta on a Vaisman structure",
            },
            FrozenConstant {
                name: "volume",
                value: 2.0 * PI * PI * LN_2,
                provenance: "closed-form integral of Pf(omega) = ln2 sin(eta) cos(eta)",
            },
        ],
    }
}

/// K-invariant sp(TM, ω) directions on the Hopf chart, built from the
/// invariant smooth blocks k_i ⊗ k_j^♭, J k_i, θ and sc·∂η with invariant
/// scalar coefficients, then projected onto sp(TM, ω) at evaluation time.
pub fn hopf_deformation_library() -> Vec<DeformationField> {
    let l2 = LN_2;
    let zeros = || vec![zero(), zero(), zero(), zero()];

    // stretch: k₁⊗k₁♭ − k₂⊗k₂♭ = diag(0, 0, sin²η, −cos²η).
    let stretch = DeformationField {
        name: "stretch".into(),
        raw: vec![
            zeros(),
            zeros(),
            vec![zero(), zero(), sin2(), zero()],
            vec![zero(), zero(), zero(), neg(cos2())],
        ],
        sp_project: true,
    };
    // mix: k₁⊗k₂♭ + k₂⊗k₁♭.
    let mix = DeformationField {
        name: "mix".into(),
        raw: vec![
            zeros(),
            zeros(),
            vec![zero(), zero(), zero(), cos2()],
            vec![zero(), zero(), sin2(), zero()],
        ],
        sp_project: true,
    };
    // breather: cos(2πs) · k₁⊗(Jk₁)♭, with (Jk₁)♭ = (−ln2 sin²η, −sc, 0, 0).
    let breather = DeformationField {
        name: "breather".into(),
        raw: vec![
            zeros(),
            zeros(),
            vec![
                mul(cos(mul(c(2.0 * PI), x(0))), neg(mul(c(l2), sin2()))),
                mul(cos(mul(c(2.0 * PI), x(0))), neg(sc())),
                zero(),
                zero(),
            ],
            zeros(),
        ],
        sp_project: true,
    };
    // shear: (sc·∂η) ⊗ θ with θ = −2 ln2 ds.
    let shear = DeformationField {
        name: "shear".into(),
        raw: vec![
            zeros(),
            vec![mul(sc(), c(-2.0 * l2)), zero(), zero(), zero()],
            zeros(),
            zeros(),
        ],
        sp_project: true,
    };
    vec![stretch, mix, breather, shear]
}

/// Flat Kähler 4-torus: the θ = 0 degenerate case in which every twisted
/// operator must reduce to its classical counterpart.
pub fn kaehler_flat() -> ExampleCatalogEntry {
    let omega = vec![
        vec![zero(), c(1.0), zero(), zero()],
        vec![c(-1.0), zero(), zero(), zero()],
        vec![zero(), zero(), zero(), c(1.0)],
        vec![zero(), zero(), c(-1.0), zero()],
    ];
    let j = vec![
        vec![zero(), c(-1.0), zero(), zero()],
        vec![c(1.0), zero(), zero(), zero()],
        vec![zero(), zero(), zero(), c(-1.0)],
        vec![zero(), zero(), c(1.0), zero()],
    ];
    let axis = || Axis { min: 0.0, max: 2.0 * PI, periodic: true };
    let gen = |i: usize| {
        (0..4)
            .map(|k| if k == i { c(1.0) } else { zero() })
            .collect::<Vec<_>>()
    };
    let chart = Chart {
        name: "kaehler_flat".into(),
        dim: 4,
        axes: vec![axis(), axis(), axis(), axis()],
        omega,
        j,
        j_conjugation: None,
        generators: vec![gen(0), gen(1), gen(2), gen(3)],
        // Translations preserve ω but are not twisted-Hamiltonian on the
        // torus; no potentials exist for them.
        potentials: vec![None, None, None, None],
        lee_coefficients: vec![0.0, 0.0, 0.0, 0.0],
        params: vec![],
    };
    // Constant-coefficient sp directions (invariant under all translations).
    let const_mix = DeformationField {
        name: "const_mix".into(),
        raw: vec![
            vec![zero(), zero(), c(0.7), c(-0.2)],
            vec![zero(), zero(), c(0.3), c(0.5)],
            vec![c(0.4), c(-0.6), zero(), zero()],
            vec![c(0.1), c(0.8), zero(), zero()],
        ],
        sp_project: true,
    };
    let const_stretch = DeformationField {
        name: "const_stretch".into(),
        raw: vec![
            vec![c(0.5), zero(), zero(), zero()],
            vec![zero(), c(-0.5), zero(), zero()],
            vec![zero(), zero(), c(0.25), zero()],
            vec![zero(), zero(), zero(), c(-0.25)],
        ],
        sp_project: true,
    };
    ExampleCatalogEntry {
        name: "kaehler_flat".into(),
        chart,
        deformations: vec![const_mix, const_stretch],
        flags: ExampleFlags {
            integrable: true,
            vaisman: false,
            kaehler: true,
        },
        frozen: vec![
            FrozenConstant {
                name: "scal",
                value: 0.0,
                provenance: "flat metric",
            },
            FrozenConstant {
                name: "mu",
                value: 0.0,
                provenance: "mu = scal when theta = 0",
            },
            FrozenConstant {
                name: "volume",
                value: (2.0 * PI).powi(4),
                provenance: "coordinate volume, Pf(omega) = 1",
            },
        ],
    }
}

/// Default deformation parameters for the deformed Hopf entry.
pub const HOPF_DEFORMED_DEFAULT_T: f64 = 0.1;

/// Hopf chart whose complex structure is exp(−ta)·J·exp(ta) at fixed t ≠ 0:
/// compatible by construction, generically non-integrable.
pub fn hopf_deformed(deformation: &str, t: f64) -> Result<ExampleCatalogEntry> {
    let base = hopf_standard();
    let field = base
        .deformations
        .iter()
        .find(|d| d.name == deformation)
        .ok_or_else(|| Error::UnknownExample(format!("hopf_deformed/{deformation}")))?
        .clone();
    let mut chart = base.chart.clone();
    chart.name = "hopf_deformed".into();
    chart.j_conjugation = Some(Conjugation {
        a: field.raw.clone(),
        t: c(t),
        sp_project: field.sp_project,
    });
    chart.params = vec![ChartParam {
        name: "t".into(),
        base: t,
    }];
    Ok(ExampleCatalogEntry {
        name: "hopf_deformed".into(),
        chart,
        deformations: base.deformations.clone(),
        flags: ExampleFlags {
            integrable: false, // measured at load; generic conjugations leave J(ω)
            vaisman: false,
            kaehler: false,
        },
        frozen: vec![],
    })
}

/// Globally conformally Kähler box chart: ω = e^f ω_flat with the standard J,
/// so g = e^f δ and θ = df is exact. Not a catalog entry; used to exercise
/// nonzero exact Lee forms against conformal-change closed forms.
pub fn conformal_flat_test(amplitude: f64) -> Chart {
    let base = kaehler_flat().chart;
    // f = amplitude · (sin x0 cos x1 + sin x2 sin x3), periodic on the box.
    let f = mul(
        c(amplitude),
        crate::expr::add(
            mul(sin(x(0)), cos(x(1))),
            mul(sin(x(2)), sin(x(3))),
        ),
    );
    let ef = crate::expr::exp(f);
    let mut omega = base.omega.clone();
    for row in omega.iter_mut() {
        for e in row.iter_mut() {
            *e = mul(ef.clone(), e.clone());
        }
    }
    Chart {
        name: "conformal_flat_test".into(),
        omega,
        generators: vec![],
        potentials: vec![],
        lee_coefficients: vec![],
        ..base
    }
}

/// Product of a round 2-sphere of the given radius with a flat 2-torus,
/// as a Kähler chart. Not a catalog entry; the closed-form scalar curvature
/// 2/r² locks the curvature sign convention.
pub fn sphere_product_test(radius: f64) -> Chart {
    let r2 = radius * radius;
    // Coordinates (ϑ, φ, x, y); ω = r² sinϑ dϑ∧dφ + dx∧dy.
    let omega = vec![
        vec![zero(), mul(c(r2), sin(x(0))), zero(), zero()],
        vec![neg(mul(c(r2), sin(x(0)))), zero(), zero(), zero()],
        vec![zero(), zero(), zero(), c(1.0)],
        vec![zero(), zero(), c(-1.0), zero()],
    ];
    // J∂ϑ = (1/sinϑ)∂φ, J∂φ = −sinϑ ∂ϑ, J∂x = ∂y, J∂y = −∂x.
    let j = vec![
        vec![zero(), neg(sin(x(0))), zero(), zero()],
        vec![div(c(1.0), sin(x(0))), zero(), zero(), zero()],
        vec![zero(), zero(), zero(), c(-1.0)],
        vec![zero(), zero(), c(1.0), zero()],
    ];
    Chart {
        name: "sphere_product_test".into(),
        dim: 4,
        axes: vec![
            Axis { min: 0.0, max: PI, periodic: false },
            Axis { min: 0.0, max: 2.0 * PI, periodic: true },
            Axis { min: 0.0, max: 2.0 * PI, periodic: true },
            Axis { min: 0.0, max: 2.0 * PI, periodic: true },
        ],
        omega,
        j,
        j_conjugation: None,
        generators: vec![],
        potentials: vec![],
        lee_coefficients: vec![],
        params: vec![],
    }
}

pub fn catalog_names() -> &'static [&'static str] {
    &["hopf_standard", "kaehler_flat", "hopf_deformed"]
}

pub fn by_name(name: &str) -> Result<ExampleCatalogEntry> {
    match name {
        "hopf_standard" => Ok(hopf_standard()),
        "kaehler_flat" => Ok(kaehler_flat()),
        "hopf_deformed" => hopf_deformed("mix", HOPF_DEFORMED_DEFAULT_T),
        other => Err(Error::UnknownExample(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{add, sub as esub};
    use crate::geometry::PointBundle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn hopf_chart_is_valid_and_compatible() {
        let entry = hopf_standard();
        entry.chart.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let x = entry.chart.sample_point(&mut rng);
            let b = PointBundle::eval(&entry.chart, &x, 2).unwrap();
            assert!(b.compat_residual < 1e-12);
            assert!(b.j_squared_residual < 1e-12);
            // Metric is the closed-form diagonal one.
            let eta = x[1];
            assert!((b.g.get(&[0, 0]).value() - LN_2 * LN_2).abs() < 1e-12);
            assert!((b.g.get(&[1, 1]).value() - 1.0).abs() < 1e-12);
            assert!((b.g.get(&[2, 2]).value() - eta.sin().powi(2)).abs() < 1e-12);
            assert!((b.g.get(&[3, 3]).value() - eta.cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn hopf_lee_form_is_minus_two_ln2_ds() {
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let x = entry.chart.sample_point(&mut rng);
            let b = PointBundle::eval(&entry.chart, &x, 3).unwrap();
            let lee = b.lee_form().unwrap();
            assert!(lee.residual < 1e-10, "lcs residual {}", lee.residual);
            assert!((lee.theta.get(&[0]).value() + 2.0 * LN_2).abs() < 1e-11);
            for i in 1..4 {
                assert!(lee.theta.get(&[i]).value().abs() < 1e-11);
            }
        }
    }

    #[test]
    fn hopf_nijenhuis_vanishes() {
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let x = entry.chart.sample_point(&mut rng);
            let b = PointBundle::eval(&entry.chart, &x, 2).unwrap();
            assert!(b.nijenhuis_residual() < 1e-10);
        }
    }

    #[test]
    fn hopf_volume_density_matches_sqrt_det_g() {
        let entry = hopf_standard();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let x = entry.chart.sample_point(&mut rng);
            let b = PointBundle::eval(&entry.chart, &x, 2).unwrap();
            let pf = b.volume_density().unwrap();
            let want = LN_2 * x[1].sin() * x[1].cos();
            assert!((pf.value() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_chart_reduces_to_identity_metric() {
        let entry = kaehler_flat();
        let b = PointBundle::eval(&entry.chart, &[0.3, 1.1, 2.0, 4.3], 3).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                let want = if i == k { 1.0 } else { 0.0 };
                assert!((b.g.get(&[i, k]).value() - want).abs() < 1e-14);
            }
        }
        let lee = b.lee_form().unwrap();
        assert!(lee.theta.value_norm_inf() < 1e-13);
        assert!(lee.residual < 1e-12);
        assert!((b.volume_density().unwrap().value() - 1.0).abs() < 1e-13);
        assert!(b.nijenhuis_residual() < 1e-14);
    }

    #[test]
    fn scaled_omega_scales_density_quadratically() {
        // ω ↦ c·ω in dim 4 scales Pf by c².
        let mut entry = kaehler_flat();
        let cval = 1.7;
        for row in entry.chart.omega.iter_mut() {
            for e in row.iter_mut() {
                *e = mul(c(cval), e.clone());
            }
        }
        // Rescale J to keep g = ω(·, J·) positive (J unchanged works: g scales too).
        let b = PointBundle::eval(&entry.chart, &[0.3, 1.1, 2.0, 4.3], 2).unwrap();
        assert!((b.volume_density().unwrap().value() - cval * cval).abs() < 1e-12);
    }

    #[test]
    fn non_lcs_bump_is_detected_through_dtheta() {
        // ω' = (1 + ε sin(x0 + x2)) dx0∧dx1 + dx2∧dx3 stays pointwise solvable
        // in dim 4 but the resulting θ is not closed.
        let mut chart = kaehler_flat().chart;
        let eps = 0.3;
        let bump = add(c(1.0), mul(c(eps), sin(add(x(0), x(2)))));
        chart.omega[0][1] = bump.clone();
        chart.omega[1][0] = esub(c(0.0), bump);
        let ctx = chart.context(3);
        let x0 = [0.4, 1.0, 2.2, 3.9];
        let vars = chart.seed_vars(&ctx, &x0, None).unwrap();
        let omega_m = chart.eval_matrix(&chart.omega, &ctx, &vars).unwrap();
        let omega = crate::tensor::TensorValue::from_fn(
            &ctx,
            4,
            &[crate::tensor::Down, crate::tensor::Down],
            |idx| omega_m.at(idx[0], idx[1]).clone(),
        );
        let lee = crate::geometry::lee_form_from_omega(&ctx, 4, &omega).unwrap();
        assert!(
            lee.dtheta_residual > 1e-3,
            "expected non-closed theta, dtheta residual {}",
            lee.dtheta_residual
        );
        assert!(lee.residual > 1e-3);
        assert!(lee.wedge_residual < 1e-10, "dim-4 wedge system is exactly solvable");
    }

    #[test]
    fn hopf_deformed_without_t_matches_standard() {
        let d0 = hopf_deformed("mix", 0.0).unwrap();
        let std = hopf_standard();
        let x = [0.3, 0.8, 1.0, 2.0];
        let a = PointBundle::eval(&d0.chart, &x, 2).unwrap();
        let b = PointBundle::eval(&std.chart, &x, 2).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                let da = a.j.get(&[i, k]).value() - b.j.get(&[i, k]).value();
                assert!(da.abs() < 1e-13);
            }
        }
    }

    #[test]
    fn hopf_deformed_generic_t_breaks_integrability() {
        let entry = hopf_deformed("mix", HOPF_DEFORMED_DEFAULT_T).unwrap();
        let b = PointBundle::eval(&entry.chart, &[0.3, 0.8, 1.0, 2.0], 2).unwrap();
        assert!(b.compat_residual < 1e-11, "conjugation stays compatible");
        assert!(
            b.nijenhuis_residual() > 1e-3,
            "Nijenhuis residual {}",
            b.nijenhuis_residual()
        );
    }

    #[test]
    fn chart_export_import_roundtrip() {
        let entry = hopf_standard();
        let s = entry.chart.to_json().unwrap();
        let back = Chart::from_json(&s).unwrap();
        let x = [0.21, 0.9, 1.3, 5.1];
        let a = PointBundle::eval(&entry.chart, &x, 2).unwrap();
        let b = PointBundle::eval(&back, &x, 2).unwrap();
        for i in 0..4 {
            for k in 0..4 {
                assert_eq!(a.omega.get(&[i, k]).value(), b.omega.get(&[i, k]).value());
                assert_eq!(a.j.get(&[i, k]).value(), b.j.get(&[i, k]).value());
            }
        }
    }
}
