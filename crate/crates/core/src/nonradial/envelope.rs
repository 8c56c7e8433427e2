use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};
use crate::nonradial::field::FieldSpec;
use crate::nonradial::sphere::sphere_points;

pub const MIN_SPHERE_SAMPLES: usize = 64;
/// Doubling stops once the envelopes move by less than this (relative).
pub const SAMPLING_REL_TOL: f64 = 1e-6;
pub const MAX_SPHERE_SAMPLES: usize = 1 << 16;

/// Extremes over `|x| = r` of the quantities entering the radial reduction.
/// `beta = AB / (x̂ᵀ a x̂ · r)` is the drift of the normalised radial operator
/// `V'' + beta V'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeProfile {
    pub r: Vec<f64>,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    pub ab_minus: Vec<f64>,
    pub ab_plus: Vec<f64>,
    pub arr_min: Vec<f64>,
    pub arr_max: Vec<f64>,
    pub beta_minus: Vec<f64>,
    pub beta_plus: Vec<f64>,
    /// Size of the largest point set used (0 when exact).
    pub samples_used: usize,
    /// Largest relative envelope change under the last doubling (0 when exact).
    pub sampling_error: f64,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy)]
struct Extremes {
    b: (f64, f64),
    ab: (f64, f64),
    arr: (f64, f64),
    beta: (f64, f64),
}

impl Extremes {
    fn empty() -> Self {
        let e = (f64::INFINITY, f64::NEG_INFINITY);
        Self {
            b: e,
            ab: e,
            arr: e,
            beta: e,
        }
    }

    fn merge(&mut self, o: &Extremes) {
        for (a, b) in [
            (&mut self.b, o.b),
            (&mut self.ab, o.ab),
            (&mut self.arr, o.arr),
            (&mut self.beta, o.beta),
        ] {
            a.0 = a.0.min(b.0);
            a.1 = a.1.max(b.1);
        }
    }

    fn values(&self) -> [f64; 8] {
        [
            self.b.0,
            self.b.1,
            self.ab.0,
            self.ab.1,
            self.arr.0,
            self.arr.1,
            self.beta.0,
            self.beta.1,
        ]
    }
}

fn exact_extremes(field: &FieldSpec, r: f64) -> Extremes {
    let s = field.a.isotropic_scale().expect("exact path needs isotropic a").eval(r);
    let parts = field.b.parts(field.d);
    // `Sum` of an empty f64 iterator is -0.0
    let radial: f64 = parts.radial.iter().map(|t| t.eval(r)).fold(0.0, |a, b| a + b);
    let c = parts.constant.iter().map(|v| v * v).sum::<f64>().sqrt();
    let b = (radial - c, radial + c);
    let dm1 = (field.d - 1) as f64;
    let ab = (dm1 * s + r * b.0, dm1 * s + r * b.1);
    Extremes {
        b,
        ab,
        arr: (s, s),
        beta: (ab.0 / (s * r), ab.1 / (s * r)),
    }
}

fn sampled_extremes(field: &FieldSpec, r: f64, pts: &[Vec<f64>]) -> Extremes {
    let mut e = Extremes::empty();
    for x in pts {
        let (tr, rr) = field.a.trace_and_radial(r, x);
        let xb = field.b.radial_component(r, x);
        let ab = tr - rr + r * xb;
        let beta = ab / (rr * r);
        e.merge(&Extremes {
            b: (xb, xb),
            ab: (ab, ab),
            arr: (rr, rr),
            beta: (beta, beta),
        });
    }
    e
}

/// Envelopes of `x̂·b`, `AB = tr a - x̂ᵀ a x̂ + x·b`, `x̂ᵀ a x̂` and `beta` at
/// each radius. Isotropic `a` gives closed forms; otherwise sphere point sets
/// of doubling size are merged until the envelopes settle.
pub fn radial_envelopes(field: &FieldSpec, r_nodes: &[f64], sphere_samples: usize) -> Result<EnvelopeProfile> {
    field.validate()?;
    if sphere_samples < MIN_SPHERE_SAMPLES {
        return Err(DeadcoreError::Parameter(format!(
            "sphere_samples must be at least {MIN_SPHERE_SAMPLES}, got {sphere_samples}"
        )));
    }
    if r_nodes.is_empty() || r_nodes.iter().any(|&r| !(r >= field.r_inner() && r.is_finite())) {
        return Err(DeadcoreError::Parameter(format!(
            "radii must be finite and at least R = {}",
            field.r_inner()
        )));
    }
    let (ext, samples_used, sampling_error) = if field.is_exact() {
        (
            r_nodes.iter().map(|&r| exact_extremes(field, r)).collect::<Vec<_>>(),
            0,
            0.0,
        )
    } else {
        let mut n = sphere_samples.min(MAX_SPHERE_SAMPLES);
        let pts = sphere_points(field.d, n);
        let mut ext: Vec<Extremes> = r_nodes.par_iter().map(|&r| sampled_extremes(field, r, &pts)).collect();
        let mut err = f64::INFINITY;
        while n < MAX_SPHERE_SAMPLES {
            n *= 2;
            let pts = sphere_points(field.d, n);
            let fresh: Vec<Extremes> = r_nodes.par_iter().map(|&r| sampled_extremes(field, r, &pts)).collect();
            err = 0.0;
            for (old, new) in ext.iter_mut().zip(&fresh) {
                let before = old.values();
                old.merge(new);
                for (a, b) in before.iter().zip(old.values()) {
                    err = f64::max(err, (a - b).abs() / a.abs().max(b.abs()).max(1e-300));
                }
            }
            if err < SAMPLING_REL_TOL {
                break;
            }
        }
        (ext, n, err)
    };
    let col = |f: fn(&Extremes) -> f64| ext.iter().map(f).collect::<Vec<f64>>();
    Ok(EnvelopeProfile {
        r: r_nodes.to_vec(),
        b_plus: col(|e| e.b.1),
        b_minus: col(|e| e.b.0),
        ab_minus: col(|e| e.ab.0),
        ab_plus: col(|e| e.ab.1),
        arr_min: col(|e| e.arr.0),
        arr_max: col(|e| e.arr.1),
        beta_minus: col(|e| e.beta.0),
        beta_plus: col(|e| e.beta.1),
        samples_used,
        sampling_error,
        exact: field.is_exact(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonradial::field::{MatrixField, VectorField};
    use crate::operator::PowerTerm;

    #[test]
    fn unit_radial_drift() {
        for d in [2, 3, 5] {
            let mut f = FieldSpec::laplacian(d, 1.0);
            f.b = VectorField::RadialPower(PowerTerm::new(1.0, 0.0, 1));
            let e = radial_envelopes(&f, &[1.0, 2.0, 7.5], 64).unwrap();
            assert!(e.b_plus.iter().chain(&e.b_minus).all(|&v| v == 1.0));
        }
    }

    #[test]
    fn laplacian_ab_minus() {
        let e = radial_envelopes(&FieldSpec::laplacian(3, 1.0), &[2.0], 64).unwrap();
        assert_eq!(e.ab_minus, vec![2.0]);
        assert_eq!(e.beta_minus, vec![1.0]);
    }

    #[test]
    fn constant_vector_extremes() {
        let mut f = FieldSpec::laplacian(3, 1.0);
        f.b = VectorField::Constant {
            vector: vec![1.0, 0.0, 0.0],
        };
        let e = radial_envelopes(&f, &[1.0], 64).unwrap();
        assert_eq!((e.b_plus[0], e.b_minus[0]), (1.0, -1.0));
    }

    #[test]
    fn sampled_envelopes_approach_closed_form() {
        // a = diag(1, 1, 2): x̂ᵀ a x̂ ∈ [1, 2], tr a = 4
        let mut f = FieldSpec::laplacian(3, 1.0);
        f.a = MatrixField::DiagonalPower {
            entries: vec![
                PowerTerm::new(1.0, 0.0, 1),
                PowerTerm::new(1.0, 0.0, 1),
                PowerTerm::new(2.0, 0.0, 1),
            ],
        };
        let e = radial_envelopes(&f, &[1.0, 3.0], 64).unwrap();
        assert!(!e.exact && e.samples_used >= 128);
        for i in 0..2 {
            assert!((e.arr_min[i] - 1.0).abs() < 1e-3 && (e.arr_max[i] - 2.0).abs() < 1e-3);
            assert!((e.ab_minus[i] - 2.0).abs() < 1e-3 && (e.ab_plus[i] - 3.0).abs() < 1e-3);
            assert!(e.b_minus[i] <= e.b_plus[i]);
        }
    }

    #[test]
    fn rejects_small_samples_and_inner_radii() {
        let f = FieldSpec::laplacian(3, 1.0);
        assert!(radial_envelopes(&f, &[1.0], 8).is_err());
        assert!(radial_envelopes(&f, &[0.5], 64).is_err());
    }
}
