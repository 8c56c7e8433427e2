//! Built-in descriptors for non-radial coefficient fields `a(x)`, `b(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{DeadcoreError, Result};
use crate::operator::{CoefficientSpec, PowerTerm};

/// Matrix-valued diffusion coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MatrixField {
    /// `scale · I`
    Identity { scale: f64 },
    /// `diag(c_i |x|^{e_i})`, one term per coordinate.
    DiagonalPower { entries: Vec<PowerTerm> },
    /// `scale (I + ε S(x))`, where `S` acts on the first two coordinates as
    /// the reflection `[[cos ωφ, sin ωφ], [sin ωφ, -cos ωφ]]` and `φ` is the
    /// polar angle of `(x₀, x₁)`. Eigenvalues are `scale (1 ± ε)` and `scale`.
    RotationPerturbed { scale: f64, epsilon: f64, omega: f64 },
}

/// Vector-valued drift coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VectorField {
    Zero,
    /// `sign · prefactor · |x|^exponent · x/|x|`
    RadialPower(PowerTerm),
    Constant {
        vector: Vec<f64>,
    },
    /// `strength |x|^exponent (-x₁, x₀, 0, …)/|x|`, tangent to every sphere.
    Swirl {
        strength: f64,
        exponent: f64,
    },
    Sum {
        fields: Vec<VectorField>,
    },
}

impl MatrixField {
    fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(DeadcoreError::InvalidOperator(m));
        match self {
            MatrixField::Identity { scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return bad(format!("identity scale must be positive, got {scale}"));
                }
            }
            MatrixField::DiagonalPower { entries } => {
                if entries.len() != d {
                    return bad(format!("diagonal field needs {d} entries, got {}", entries.len()));
                }
                for e in entries {
                    if !(e.prefactor > 0.0 && e.prefactor.is_finite() && e.exponent.is_finite() && e.sign == 1) {
                        return bad("diagonal entries must be positive power laws".into());
                    }
                }
            }
            MatrixField::RotationPerturbed { scale, epsilon, omega } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return bad(format!("scale must be positive, got {scale}"));
                }
                if !(*epsilon >= 0.0 && *epsilon < 1.0) {
                    return bad(format!("epsilon must lie in [0, 1) for ellipticity, got {epsilon}"));
                }
                if !omega.is_finite() {
                    return bad("omega must be finite".into());
                }
            }
        }
        Ok(())
    }

    /// `a = s(|x|) I` for some scalar `s`; the scalar as a radial spec.
    pub fn isotropic_scale(&self) -> Option<CoefficientSpec> {
        match self {
            MatrixField::Identity { scale } => Some(CoefficientSpec::constant(*scale)),
            MatrixField::DiagonalPower { entries } if entries.windows(2).all(|w| w[0] == w[1]) => {
                let e = entries[0];
                Some(if e.exponent == 0.0 {
                    CoefficientSpec::constant(e.prefactor)
                } else {
                    CoefficientSpec::Power(e)
                })
            }
            MatrixField::RotationPerturbed { scale, epsilon, .. } if *epsilon == 0.0 => {
                Some(CoefficientSpec::constant(*scale))
            }
            _ => None,
        }
    }

    /// `(trace a(x), x̂ᵀ a(x) x̂)` at `x = r x̂`.
    pub fn trace_and_radial(&self, r: f64, xhat: &[f64]) -> (f64, f64) {
        match self {
            MatrixField::Identity { scale } => (scale * xhat.len() as f64, *scale),
            MatrixField::DiagonalPower { entries } => {
                let mut tr = 0.0;
                let mut rr = 0.0;
                for (e, x) in entries.iter().zip(xhat) {
                    let v = e.eval(r);
                    tr += v;
                    rr += v * x * x;
                }
                (tr, rr)
            }
            MatrixField::RotationPerturbed { scale, epsilon, omega } => {
                let d = xhat.len() as f64;
                let phi = xhat[1].atan2(xhat[0]);
                let (s, c) = (omega * phi).sin_cos();
                let quad = c * (xhat[0] * xhat[0] - xhat[1] * xhat[1]) + 2.0 * s * xhat[0] * xhat[1];
                (scale * d, scale * (1.0 + epsilon * quad))
            }
        }
    }

    /// Smallest and largest eigenvalue of `a(x)` for `|x| = r` (exact).
    pub fn eigen_bounds(&self, r: f64) -> (f64, f64) {
        match self {
            MatrixField::Identity { scale } => (*scale, *scale),
            MatrixField::DiagonalPower { entries } => entries
                .iter()
                .map(|e| e.eval(r))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v))),
            MatrixField::RotationPerturbed { scale, epsilon, .. } => (scale * (1.0 - epsilon), scale * (1.0 + epsilon)),
        }
    }
}

/// `b(x)` split into a radial part (a function of `|x|`), a constant vector
/// and tangential parts that do not contribute to `x̂ · b`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DriftParts {
    pub radial: Vec<PowerTerm>,
    pub constant: Vec<f64>,
}

impl VectorField {
    fn validate(&self, d: usize) -> Result<()> {
        match self {
            VectorField::Zero => Ok(()),
            VectorField::RadialPower(t) => {
                if t.prefactor.is_finite() && t.exponent.is_finite() && (t.sign == 1 || t.sign == -1) {
                    Ok(())
                } else {
                    Err(DeadcoreError::InvalidOperator("invalid radial drift term".into()))
                }
            }
            VectorField::Constant { vector } => {
                if vector.len() != d || vector.iter().any(|v| !v.is_finite()) {
                    Err(DeadcoreError::InvalidOperator(format!(
                        "constant drift needs {d} finite components"
                    )))
                } else {
                    Ok(())
                }
            }
            VectorField::Swirl { strength, exponent } => {
                if strength.is_finite() && exponent.is_finite() {
                    Ok(())
                } else {
                    Err(DeadcoreError::InvalidOperator("swirl parameters must be finite".into()))
                }
            }
            VectorField::Sum { fields } => fields.iter().try_for_each(|f| f.validate(d)),
        }
    }

    pub fn parts(&self, d: usize) -> DriftParts {
        let mut out = DriftParts {
            radial: Vec::new(),
            constant: vec![0.0; d],
        };
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut DriftParts) {
        match self {
            VectorField::Zero | VectorField::Swirl { .. } => {}
            VectorField::RadialPower(t) => out.radial.push(*t),
            VectorField::Constant { vector } => {
                for (a, b) in out.constant.iter_mut().zip(vector) {
                    *a += b;
                }
            }
            VectorField::Sum { fields } => fields.iter().for_each(|f| f.collect(out)),
        }
    }

    /// `x̂ · b(r x̂)`.
    pub fn radial_component(&self, r: f64, xhat: &[f64]) -> f64 {
        match self {
            VectorField::Zero => 0.0,
            VectorField::RadialPower(t) => t.eval(r),
            VectorField::Constant { vector } => vector.iter().zip(xhat).map(|(a, b)| a * b).sum(),
            VectorField::Swirl { strength, exponent } => {
                // (-x₁, x₀)·(x₀, x₁) = 0, written out so that sampling sees
                // the same rounding as any other field
                strength * r.powf(*exponent) * (-xhat[1] * xhat[0] + xhat[0] * xhat[1])
            }
            VectorField::Sum { fields } => fields.iter().map(|f| f.radial_component(r, xhat)).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub d: usize,
    pub a: MatrixField,
    pub b: VectorField,
    #[serde(rename = "Lambda")]
    pub lambda: CoefficientSpec,
    /// `(R, R₁)` with `B_R ⊂ D ⊂ B_{R₁}`.
    pub domain_radii: (f64, f64),
    /// `(min h₀, max h₀)` over `∂D`.
    pub h0_range: (f64, f64),
    pub star_shaped: bool,
}

impl FieldSpec {
    /// `Δ` outside the ball of radius `r_inner` in `d` dimensions, `Λ = 1`.
    pub fn laplacian(d: usize, r_inner: f64) -> Self {
        Self {
            d,
            a: MatrixField::Identity { scale: 1.0 },
            b: VectorField::Zero,
            lambda: CoefficientSpec::constant(1.0),
            domain_radii: (r_inner, r_inner),
            h0_range: (1.0, 1.0),
            star_shaped: true,
        }
    }

    pub fn r_inner(&self) -> f64 {
        self.domain_radii.0
    }

    pub fn r_outer(&self) -> f64 {
        self.domain_radii.1
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 || self.d > 64 {
            return Err(DeadcoreError::InvalidOperator(format!(
                "dimension must lie in [2, 64], got {}",
                self.d
            )));
        }
        let (r0, r1) = self.domain_radii;
        if !(r0 > 0.0 && r1 >= r0 && r1.is_finite()) {
            return Err(DeadcoreError::InvalidOperator(format!(
                "domain radii must satisfy 0 < R <= R1, got ({r0}, {r1})"
            )));
        }
        let (h0, h1) = self.h0_range;
        if !(h0 > 0.0 && h1 >= h0 && h1.is_finite()) {
            return Err(DeadcoreError::InvalidOperator(format!(
                "h0 range must satisfy 0 < min <= max, got ({h0}, {h1})"
            )));
        }
        self.a.validate(self.d)?;
        self.b.validate(self.d)?;
        self.lambda.validate()?;
        for k in 0..=40 {
            let r = r0 * 10f64.powf(k as f64 / 5.0);
            let l = self.lambda.eval(r);
            if !(l > 0.0 && l.is_finite()) {
                return Err(DeadcoreError::InvalidOperator(format!(
                    "Lambda({r}) = {l} is not positive"
                )));
            }
            let (lo, hi) = self.a.eigen_bounds(r);
            if !(lo > 0.0 && hi.is_finite()) {
                return Err(DeadcoreError::InvalidOperator(format!(
                    "a is not uniformly elliptic at |x| = {r} (eigenvalues in [{lo}, {hi}])"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let f: FieldSpec = serde_json::from_str(s)?;
        f.validate()?;
        Ok(f)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Envelopes are available in closed form when `a` is isotropic.
    pub fn is_exact(&self) -> bool {
        self.a.isotropic_scale().is_some()
    }
}
