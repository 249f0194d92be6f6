//! Linear canonical transform parameter algebra and pointwise kernel evaluation.
//!
//! A transform is identified by a unimodular matrix `[a b; c d]`. Entries are
//! complex so the whole catalog of named transforms can be represented, but
//! the recovery pipeline only accepts real matrices with `b > 0`
//! (see [`LctParams::require_pipeline`]).

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest tolerated `|ad - bc - 1|`.
pub const UNIMODULAR_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const J: Complex64 = Complex64::new(0.0, 1.0);

/// Unimodular parameter matrix `[a b; c d]` of a linear canonical transform.
#[derive(Clone, Copy, PartialEq)]
pub struct LctParams {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl fmt::Debug for LctParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real() {
            write!(
                f,
                "LctParams[{} {}; {} {}]",
                self.a.re, self.b.re, self.c.re, self.d.re
            )
        } else {
            write!(
                f,
                "LctParams[{} {}; {} {}]",
                self.a, self.b, self.c, self.d
            )
        }
    }
}

impl LctParams {
    /// Validates unimodularity and builds the parameter matrix.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let residual = (a * d - b * c - ONE).norm();
        if !residual.is_finite() || residual > UNIMODULAR_TOL {
            return Err(Error::NotUnimodular { residual });
        }
        Ok(Self { a, b, c, d })
    }

    /// Real-entry convenience constructor.
    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Self {
            a: ONE,
            b: ZERO,
            c: ZERO,
            d: ONE,
        }
    }

    /// `[0 1; -1 0]`, the Fourier transform.
    pub fn fourier() -> Self {
        Self {
            a: ZERO,
            b: ONE,
            c: -ONE,
            d: ZERO,
        }
    }

    /// Rotation `[cos θ, sin θ; -sin θ, cos θ]`, the fractional Fourier transform.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            a: c.into(),
            b: s.into(),
            c: (-s).into(),
            d: c.into(),
        }
    }

    /// `[1 b; 0 1]`, the Fresnel transform.
    pub fn fresnel(b: f64) -> Self {
        Self {
            a: ONE,
            b: b.into(),
            c: ZERO,
            d: ONE,
        }
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    pub fn d(&self) -> Complex64 {
        self.d
    }

    /// True when all four entries have zero imaginary part.
    pub fn is_real(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.im == 0.0)
    }

    /// `|ad - bc - 1|`.
    pub fn unimodular_residual(&self) -> f64 {
        (self.a * self.d - self.b * self.c - ONE).norm()
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    /// Real entries `(a, b, c, d)`, provided the matrix is real with `b > 0`.
    ///
    /// Every stage downstream of the transform algebra relies on `e^{-j m ω0 t}`
    /// being unimodular, which holds only for this family.
    pub fn require_pipeline(&self) -> Result<RealParams> {
        if !self.is_real() {
            return Err(Error::Precondition(
                "complex-valued parameter matrices are not supported for recovery".into(),
            ));
        }
        if !(self.b.re > 0.0) {
            return Err(Error::Precondition(format!(
                "recovery requires b > 0, got b = {}",
                self.b.re
            )));
        }
        Ok(RealParams {
            a: self.a.re,
            b: self.b.re,
            c: self.c.re,
            d: self.d.re,
        })
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &LctParams) -> f64 {
        let (x, y) = (self.matrix(), other.matrix());
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for k in 0..2 {
                m = m.max((x[i][k] - y[i][k]).norm());
            }
        }
        m
    }
}

/// Real pipeline parameters; constructed only through [`LctParams::require_pipeline`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RealParams {
    /// Phase `e^{+j a t^2 / 2b}` that maps amplitudes `c_k` to weights `ρ_k`.
    pub fn chirp(&self, t: f64) -> Complex64 {
        Complex64::from_polar(1.0, self.a * t * t / (2.0 * self.b))
    }

    /// Phase `e^{-j d ω^2 / 2b}`.
    pub fn output_chirp(&self, omega: f64) -> Complex64 {
        Complex64::from_polar(1.0, -self.d * omega * omega / (2.0 * self.b))
    }
}

/// Validating constructor with the residual reported on failure.
pub fn make_params(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<LctParams> {
    LctParams::new(a, b, c, d)
}

/// Named members of the transform family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StandardTransform {
    FractionalFourier { theta: f64 },
    Fourier,
    Laplace,
    FractionalLaplace { theta: f64 },
    Fresnel { b: f64 },
    BilateralLaplace { b: f64 },
    GaussWeierstrass { b: f64 },
    Bargmann,
}

impl StandardTransform {
    /// Parses a transform name, pulling the angle or `b` argument where needed.
    pub fn from_name(name: &str, theta: Option<f64>, b: Option<f64>) -> Result<Self> {
        let need_theta = || {
            theta.ok_or_else(|| Error::InvalidParameter(format!("`{name}` requires an angle")))
        };
        let need_b =
            || b.ok_or_else(|| Error::InvalidParameter(format!("`{name}` requires a b value")));
        let key = name.to_ascii_lowercase().replace(['-', '_', ' '], "");
        Ok(match key.as_str() {
            "frft" | "fractionalfourier" => Self::FractionalFourier {
                theta: need_theta()?,
            },
            "ft" | "fourier" => Self::Fourier,
            "lt" | "laplace" => Self::Laplace,
            "frlt" | "fractionallaplace" => Self::FractionalLaplace {
                theta: need_theta()?,
            },
            "fresnel" => Self::Fresnel { b: need_b()? },
            "bilaterallt" | "bilaterallaplace" => Self::BilateralLaplace { b: need_b()? },
            "gaussweierstrass" => Self::GaussWeierstrass { b: need_b()? },
            "bargmann" => Self::Bargmann,
            _ => return Err(Error::UnknownTransform(name.to_string())),
        })
    }
}

/// The catalog matrix for a named transform.
///
/// The Bargmann entry uses `(1/√2)[1 -j; -j 1]`. The bilateral Laplace matrix
/// `[1 jb; j 1]` has determinant `1 + b`, so it is only accepted for `b = 0`.
pub fn standard_matrix(kind: StandardTransform) -> Result<LctParams> {
    match kind {
        StandardTransform::FractionalFourier { theta } => Ok(LctParams::rotation(theta)),
        StandardTransform::Fourier => Ok(LctParams::fourier()),
        StandardTransform::Laplace => LctParams::new(ZERO, J, J, ZERO),
        StandardTransform::FractionalLaplace { theta } => {
            let (s, c) = theta.sin_cos();
            LctParams::new(J * c, J * s, J * s, -J * c)
        }
        StandardTransform::Fresnel { b } => Ok(LctParams::fresnel(b)),
        StandardTransform::BilateralLaplace { b } => LctParams::new(ONE, J * b, J, ONE),
        StandardTransform::GaussWeierstrass { b } => {
            if b < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "Gauss-Weierstrass transform requires b >= 0, got {b}"
                )));
            }
            LctParams::new(ONE, -J * b, ZERO, ONE)
        }
        StandardTransform::Bargmann => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            LctParams::new(s.into(), -J * s, -J * s, s.into())
        }
    }
}

/// `1/√(-j2πb)` on the principal branch.
fn kernel_scale(b: Complex64) -> Complex64 {
    (Complex64::new(0.0, -2.0 * PI) * b).sqrt().inv()
}

/// Transform kernel `(1/√(-j2πb)) exp(-j(a t² + d ω² - 2ωt)/(2b))`.
pub fn kernel(params: &LctParams, t: f64, omega: f64) -> Result<Complex64> {
    let LctParams { a, b, d, .. } = *params;
    if b == ZERO {
        return Err(Error::ZeroB);
    }
    let phase = (a * t * t + d * omega * omega - 2.0 * omega * t) / (2.0 * b);
    Ok(kernel_scale(b) * (-J * phase).exp())
}

/// Transform of a spike train, `Σ_k c_k k_Λ(t_k, ω)`.
pub fn lct_of_spikes(params: &LctParams, spikes: &SpikeTrain, omega: f64) -> Result<Complex64> {
    if params.b == ZERO {
        return Err(Error::ZeroB);
    }
    spikes
        .iter()
        .map(|s| kernel(params, s.t, omega).map(|k| s.c * k))
        .sum()
}

/// Trapezoid-rule transform `∫ f(x) conj(k_Λ(x, ω)) dx` of samples on an
/// ascending (not necessarily uniform) grid.
///
/// Only intended for verification of the closed forms on smooth test functions.
pub fn lct_trapezoid(
    params: &LctParams,
    grid: &[f64],
    values: &[Complex64],
    omega: f64,
) -> Result<Complex64> {
    if grid.len() != values.len() {
        return Err(Error::LengthMismatch {
            expected: grid.len(),
            found: values.len(),
        });
    }
    let integrand = grid
        .iter()
        .zip(values)
        .map(|(&x, &f)| kernel(params, x, omega).map(|k| f * k.conj()))
        .collect::<Result<Vec<_>>>()?;
    Ok(grid
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(x, f)| (f[0] + f[1]) * (0.5 * (x[1] - x[0])))
        .sum())
}

fn mul(x: [[Complex64; 2]; 2], y: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = x[i][0] * y[0][k] + x[i][1] * y[1][k];
        }
    }
    out
}

fn from_matrix(m: [[Complex64; 2]; 2]) -> Result<LctParams> {
    LctParams::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

/// Matrix product of two parameter matrices, `lhs · rhs`.
pub fn matmul(lhs: &LctParams, rhs: &LctParams) -> Result<LctParams> {
    from_matrix(mul(lhs.matrix(), rhs.matrix()))
}

/// Parameters of `L_{Λ1} ∘ L_{Λ2}`, which is the product `Λ2 · Λ1`.
pub fn compose(first: &LctParams, second: &LctParams) -> Result<LctParams> {
    matmul(second, first)
}

/// `Λ⁻¹ = [d -b; -c a]`.
pub fn invert(params: &LctParams) -> LctParams {
    LctParams {
        a: params.d,
        b: -params.b,
        c: -params.c,
        d: params.a,
    }
}

/// `Λ = M1 · Λ_FT · M2` with `M1 = [b 0; d 1/b]`, `M2 = [1 0; a/b 1]`.
pub fn fourier_factorization(params: &LctParams) -> Result<(LctParams, LctParams)> {
    let LctParams { a, b, d, .. } = *params;
    if b == ZERO {
        return Err(Error::ZeroB);
    }
    // Both factors have determinant exactly 1 in exact arithmetic; build them
    // directly so rounding in b·(1/b) does not trip validation.
    let m1 = LctParams {
        a: b,
        b: ZERO,
        c: d,
        d: b.inv(),
    };
    let m2 = LctParams {
        a: ONE,
        b: ZERO,
        c: a / b,
        d: ONE,
    };
    Ok((m1, m2))
}

/// Rotation angle, dilation `Γ` and shear `u` with `Λ = Λ_θ · diag(Γ, 1/Γ) · [1 u; 0 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Iwasawa {
    pub theta: f64,
    pub gamma: f64,
    pub shear: f64,
}

impl Iwasawa {
    /// Multiplies the three factors back together.
    pub fn reassemble(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let g = self.gamma;
        let u = self.shear;
        [[c * g, c * g * u + s / g], [-s * g, -s * g * u + c / g]]
    }
}

pub fn iwasawa_factorization(params: &LctParams) -> Result<Iwasawa> {
    if !params.is_real() {
        return Err(Error::Precondition(
            "Iwasawa factorization needs real entries".into(),
        ));
    }
    let (a, b, c, d) = (params.a.re, params.b.re, params.c.re, params.d.re);
    let gamma = a.hypot(c);
    if gamma == 0.0 {
        return Err(Error::InvalidParameter(
            "first column is zero; no Iwasawa factorization".into(),
        ));
    }
    Ok(Iwasawa {
        theta: (-c).atan2(a),
        gamma,
        shear: (a * b + c * d) / (gamma * gamma),
    })
}

/// One Dirac mass `c δ(t - t_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spike {
    pub t: f64,
    pub c: Complex64,
}

impl Spike {
    pub fn new(t: f64, c: Complex64) -> Self {
        Self { t, c }
    }
}

/// Finite spike train supported on `[0, τ)` with strictly increasing locations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpikeTrain {
    tau: f64,
    spikes: Vec<Spike>,
}

impl SpikeTrain {
    pub fn new(tau: f64, spikes: Vec<Spike>) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidSpikeTrain(format!(
                "period must be positive and finite, got {tau}"
            )));
        }
        for s in &spikes {
            if !(s.t >= 0.0 && s.t < tau) {
                return Err(Error::InvalidSpikeTrain(format!(
                    "location {} outside [0, {tau})",
                    s.t
                )));
            }
            if !(s.c.re.is_finite() && s.c.im.is_finite()) {
                return Err(Error::InvalidSpikeTrain(format!(
                    "non-finite amplitude at t = {}",
                    s.t
                )));
            }
        }
        if let Some(w) = spikes.windows(2).find(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidSpikeTrain(format!(
                "locations must be strictly increasing ({} then {})",
                w[0].t, w[1].t
            )));
        }
        Ok(Self { tau, spikes })
    }

    /// Sorts by location before validating.
    pub fn from_unsorted(tau: f64, mut spikes: Vec<Spike>) -> Result<Self> {
        spikes.sort_by(|x, y| x.t.total_cmp(&y.t));
        Self::new(tau, spikes)
    }

    pub fn empty(tau: f64) -> Result<Self> {
        Self::new(tau, Vec::new())
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn spikes(&self) -> &[Spike] {
        &self.spikes
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Spike> {
        self.spikes.iter()
    }

    pub fn len(&self) -> usize {
        self.spikes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spikes.is_empty()
    }

    pub fn locations(&self) -> Vec<f64> {
        self.spikes.iter().map(|s| s.t).collect()
    }

    pub fn amplitudes(&self) -> Vec<Complex64> {
        self.spikes.iter().map(|s| s.c).collect()
    }

    /// Sum of amplitude magnitudes.
    pub fn tv_norm(&self) -> f64 {
        self.spikes.iter().map(|s| s.c.norm()).sum()
    }
}
