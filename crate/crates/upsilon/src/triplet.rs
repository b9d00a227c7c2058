//! Generating triplets (A, nu, gamma) of infinitely divisible laws, with the
//! Levy measure kept in polar-decomposed form: finitely many unit directions,
//! each carrying a radial measure on (0, inf).
//!
//! The cumulant uses the x/(1+|x|^2) centering throughout. Dimensions are
//! restricted to 1..=3 with discrete spherical support; every construction
//! in the one-dimensional engine uses directions {-1, +1}.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{
    integrate_support, integrate_support_complex, scan_near_zero, scan_tail, PartialIntegral,
    DEFAULT_TOL,
};

/// Pointwise density with declared support and an optional near-zero power
/// hint so quadrature can decide integrability analytically.
#[derive(Clone)]
pub struct SupportedDensity {
    f: DensityFn,
    lo: f64,
    hi: f64,
    near_zero_exponent: Option<f64>,
}

#[derive(Clone)]
pub enum DensityFn {
    Expr(Expr),
    Closure(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Piecewise constant: values[i] on (breaks[i-1], breaks[i]], `beyond` after.
    Steps {
        breaks: Vec<f64>,
        values: Vec<f64>,
        beyond: f64,
    },
}

impl fmt::Debug for SupportedDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.f {
            DensityFn::Expr(e) => format!("expr({e})"),
            DensityFn::Closure(_) => "closure".to_string(),
            DensityFn::Steps { breaks, .. } => format!("steps({})", breaks.len()),
        };
        write!(f, "SupportedDensity[{kind} on ({}, {})]", self.lo, self.hi)
    }
}

impl SupportedDensity {
    pub fn from_expr(src: &str, lo: f64, hi: f64, near_zero_exponent: Option<f64>) -> Result<Self> {
        let e = Expr::parse(src)?;
        Self::from_ast(e, lo, hi, near_zero_exponent)
    }

    pub fn from_ast(e: Expr, lo: f64, hi: f64, near_zero_exponent: Option<f64>) -> Result<Self> {
        Self::check_bounds(lo, hi)?;
        Ok(SupportedDensity {
            f: DensityFn::Expr(e),
            lo,
            hi,
            near_zero_exponent,
        })
    }

    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(
        f: F,
        lo: f64,
        hi: f64,
        near_zero_exponent: Option<f64>,
    ) -> Self {
        SupportedDensity {
            f: DensityFn::Closure(Arc::new(f)),
            lo,
            hi,
            near_zero_exponent,
        }
    }

    pub fn from_steps(breaks: Vec<f64>, values: Vec<f64>, beyond: f64) -> Result<Self> {
        if breaks.len() != values.len() || breaks.is_empty() {
            return Err(Error::invalid("steps density", "breaks/values length mismatch or empty"));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks[0] <= 0.0 {
            return Err(Error::invalid("steps density", "breaks must be positive and increasing"));
        }
        let hi = if beyond != 0.0 {
            f64::INFINITY
        } else {
            *breaks.last().expect("non-empty")
        };
        Ok(SupportedDensity {
            f: DensityFn::Steps { breaks, values, beyond },
            lo: 0.0,
            hi,
            near_zero_exponent: Some(0.0),
        })
    }

    fn check_bounds(lo: f64, hi: f64) -> Result<()> {
        if !(lo >= 0.0) || !(hi > lo) {
            return Err(Error::invalid(
                "density support",
                format!("need 0 <= lo < hi, got ({lo}, {hi})"),
            ));
        }
        Ok(())
    }

    pub fn at(&self, r: f64) -> f64 {
        if r <= 0.0 || r < self.lo || r > self.hi {
            return 0.0;
        }
        let v = match &self.f {
            DensityFn::Expr(e) => e.eval(r),
            DensityFn::Closure(f) => f(r),
            DensityFn::Steps { breaks, values, beyond } => {
                let i = breaks.partition_point(|&b| b < r);
                if i < values.len() {
                    values[i]
                } else {
                    *beyond
                }
            }
        };
        if v.is_nan() {
            0.0
        } else {
            v
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn near_zero_exponent(&self) -> Option<f64> {
        self.near_zero_exponent
    }

    pub fn kind(&self) -> &DensityFn {
        &self.f
    }

    /// Integral of w(r) * density(r) over the support, with divergence
    /// detection at both ends. `weight_exponent_at_zero` is the power of the
    /// weight near 0, combined with the density's own hint when present;
    /// pass `f64::INFINITY` when the weight vanishes near the origin.
    pub fn weighted_integral<W: Fn(f64) -> f64>(&self, w: W, weight_exponent_at_zero: f64) -> PartialIntegral {
        let f = |r: f64| w(r) * self.at(r);
        if self.hi <= self.lo {
            return PartialIntegral::finite(0.0);
        }
        let split = if self.lo == 0.0 { self.hi.min(1.0) } else { self.lo };
        let near = if self.lo == 0.0 {
            let hint = self.near_zero_exponent.map(|p| p + weight_exponent_at_zero);
            scan_near_zero(f, split, hint, DEFAULT_TOL)
        } else {
            PartialIntegral::finite(0.0)
        };
        let far = if self.hi.is_finite() {
            if self.hi > split {
                match integrate_support(f, split, self.hi, DEFAULT_TOL) {
                    Ok(r) => PartialIntegral::finite(r.value),
                    Err(Error::QuadratureNonConvergence { estimate, .. }) => PartialIntegral::finite(estimate),
                    Err(_) => PartialIntegral::divergent(0.0),
                }
            } else {
                PartialIntegral::finite(0.0)
            }
        } else {
            scan_tail(f, split, DEFAULT_TOL)
        };
        PartialIntegral {
            value: near.value + far.value,
            finite: near.finite && far.finite,
        }
    }
}

/// Atom of a measure on (0, inf).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassAtom {
    pub at: f64,
    pub mass: f64,
}

/// Borel measure Q on (0, inf): atoms plus an optional density. Its Laplace
/// transform is the complete-monotonicity certificate used throughout.
#[derive(Debug, Clone, Default)]
pub struct MixingMeasure {
    atoms: Vec<MassAtom>,
    density: Option<SupportedDensity>,
}

impl MixingMeasure {
    pub fn new(mut atoms: Vec<MassAtom>, density: Option<SupportedDensity>) -> Result<Self> {
        for a in &atoms {
            if !(a.at > 0.0) || !(a.mass > 0.0) || !a.at.is_finite() || !a.mass.is_finite() {
                return Err(Error::invalid(
                    "mixing measure",
                    format!("atoms need finite location > 0 and mass > 0, got ({}, {})", a.at, a.mass),
                ));
            }
        }
        atoms.sort_by(|a, b| a.at.total_cmp(&b.at));
        let mut merged: Vec<MassAtom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.at == a.at => last.mass += a.mass,
                _ => merged.push(a),
            }
        }
        Ok(MixingMeasure {
            atoms: merged,
            density,
        })
    }

    pub fn zero() -> Self {
        MixingMeasure::default()
    }

    pub fn dirac(at: f64, mass: f64) -> Self {
        MixingMeasure::new(vec![MassAtom { at, mass }], None).expect("valid atom")
    }

    pub fn atoms(&self) -> &[MassAtom] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&SupportedDensity> {
        self.density.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_none()
    }

    /// g(s) = int e^(-s t) Q(dt), s > 0.
    ///
    /// Plain adaptive quadrature on the fast path; the divergence-scanning
    /// route only runs when that fails to converge.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        let mut acc: f64 = self.atoms.iter().map(|a| a.mass * (-s * a.at).exp()).sum();
        if let Some(d) = &self.density {
            // e^(-s t) confines the mass to t <~ 1/s: cap the domain there
            // so the quadrature nodes actually see the boundary layer
            let upper = laplace_cap(d.lo(), d.hi(), s);
            match integrate_support(|t| (-s * t).exp() * d.at(t), d.lo(), upper, 1e-11) {
                Ok(r) => acc += r.value,
                Err(_) => {
                    let part = d.weighted_integral(|t| (-s * t).exp(), 0.0);
                    if !part.finite {
                        return Err(Error::Divergent(format!(
                            "Laplace transform of mixing density at s = {s}"
                        )));
                    }
                    acc += part.value;
                }
            }
        }
        Ok(acc)
    }

    /// int t^-1 e^(-s t) Q(dt); s = 0 gives the total mass of t^-1 Q.
    pub fn laplace_inv_t(&self, s: f64) -> PartialIntegral {
        let atom_part: f64 = self.atoms.iter().map(|a| a.mass / a.at * (-s * a.at).exp()).sum();
        let mut out = PartialIntegral::finite(atom_part);
        if let Some(d) = &self.density {
            let upper = laplace_cap(d.lo(), d.hi(), s);
            let part = match integrate_support(|t| (-s * t).exp() / t * d.at(t), d.lo(), upper, 1e-11) {
                Ok(r) => PartialIntegral::finite(r.value),
                Err(_) => d.weighted_integral(|t| (-s * t).exp() / t, -1.0),
            };
            out.value += part.value;
            out.finite &= part.finite;
        }
        out
    }
}

/// Domain cap for int e^(-s t) w(t) dt: everything beyond lo + 45/s is
/// below double precision relative to the integrand's peak.
fn laplace_cap(lo: f64, hi: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return hi;
    }
    hi.min(lo.max(0.0) + 45.0 / s)
}

/// Radial component of a Levy measure on (0, inf).
#[derive(Debug, Clone)]
pub enum RadialMeasure {
    Atoms(Vec<MassAtom>),
    Density(SupportedDensity),
    /// Density r^(alpha-1) g(r^alpha) with g the Laplace transform of `mixing`.
    CmRep(CmRep),
    Sum(Vec<RadialMeasure>),
}

#[derive(Debug, Clone)]
pub struct CmRep {
    pub alpha: f64,
    pub mixing: MixingMeasure,
}

impl CmRep {
    pub fn new(alpha: f64, mixing: MixingMeasure) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::invalid("CM representation", format!("need alpha > 0, got {alpha}")));
        }
        Ok(CmRep { alpha, mixing })
    }

    /// g(y), the completely monotone factor.
    pub fn g(&self, y: f64) -> f64 {
        self.mixing.laplace(y).unwrap_or(f64::NAN)
    }

    /// Radial density r^(alpha-1) g(r^alpha).
    pub fn density_at(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        r.powf(self.alpha - 1.0) * self.g(r.powf(self.alpha))
    }

    /// nu([r, inf)) = int (alpha t)^-1 e^(-r^alpha t) Q(dt).
    pub fn tail_mass(&self, r: f64) -> PartialIntegral {
        let s = r.powf(self.alpha);
        let mut part = self.mixing.laplace_inv_t(s);
        part.value /= self.alpha;
        part
    }
}

impl RadialMeasure {
    pub fn atom(r: f64, w: f64) -> Self {
        RadialMeasure::Atoms(vec![MassAtom { at: r, mass: w }])
    }

    pub fn density_expr(src: &str, lo: f64, hi: f64, hint: Option<f64>) -> Result<Self> {
        Ok(RadialMeasure::Density(SupportedDensity::from_expr(src, lo, hi, hint)?))
    }

    pub fn density_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(
        f: F,
        lo: f64,
        hi: f64,
        hint: Option<f64>,
    ) -> Self {
        RadialMeasure::Density(SupportedDensity::from_fn(f, lo, hi, hint))
    }

    pub fn zero() -> Self {
        RadialMeasure::Atoms(vec![])
    }

    pub fn is_zero(&self) -> bool {
        match self {
            RadialMeasure::Atoms(a) => a.is_empty(),
            RadialMeasure::Density(_) => false,
            RadialMeasure::CmRep(c) => c.mixing.is_zero(),
            RadialMeasure::Sum(v) => v.iter().all(|p| p.is_zero()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialMeasure::Atoms(atoms) => {
                for a in atoms {
                    if !(a.at > 0.0) || !(a.mass > 0.0) {
                        return Err(Error::invalid(
                            "radial atoms",
                            format!("need radius > 0 (no atom at 0) and weight > 0, got ({}, {})", a.at, a.mass),
                        ));
                    }
                }
                Ok(())
            }
            RadialMeasure::Density(_) => Ok(()),
            RadialMeasure::CmRep(c) => {
                if !(c.alpha > 0.0) {
                    return Err(Error::invalid("CM representation", "alpha must be positive"));
                }
                Ok(())
            }
            RadialMeasure::Sum(parts) => parts.iter().try_for_each(|p| p.validate()),
        }
    }

    pub fn has_atoms(&self) -> bool {
        match self {
            RadialMeasure::Atoms(a) => !a.is_empty(),
            RadialMeasure::Density(_) | RadialMeasure::CmRep(_) => false,
            RadialMeasure::Sum(v) => v.iter().any(|p| p.has_atoms()),
        }
    }

    /// Pointwise density of the absolutely continuous part.
    pub fn density_at(&self, r: f64) -> f64 {
        match self {
            RadialMeasure::Atoms(_) => 0.0,
            RadialMeasure::Density(d) => d.at(r),
            RadialMeasure::CmRep(c) => c.density_at(r),
            RadialMeasure::Sum(v) => v.iter().map(|p| p.density_at(r)).sum(),
        }
    }

    /// int_(0,1) r^2 nu(dr).
    pub fn mass2_near_zero(&self) -> PartialIntegral {
        match self {
            RadialMeasure::Atoms(atoms) => PartialIntegral::finite(
                atoms.iter().filter(|a| a.at < 1.0).map(|a| a.mass * a.at * a.at).sum(),
            ),
            RadialMeasure::Density(d) => {
                let clipped = |r: f64| if r < 1.0 { r * r * d.at(r) } else { 0.0 };
                if d.lo() >= 1.0 {
                    return PartialIntegral::finite(0.0);
                }
                let hint = d.near_zero_exponent().map(|p| p + 2.0);
                scan_near_zero(clipped, d.hi().min(1.0), hint, DEFAULT_TOL)
            }
            RadialMeasure::CmRep(c) => {
                // int_0^1 r^(alpha+1) g(r^alpha) dr = (1/alpha) int_0^1 u^(2/alpha) g(u) du
                let a = c.alpha;
                scan_near_zero(|u: f64| u.powf(2.0 / a) * c.g(u) / a, 1.0, None, DEFAULT_TOL)
            }
            RadialMeasure::Sum(parts) => sum_partials(parts.iter().map(|p| p.mass2_near_zero())),
        }
    }

    /// nu([1, inf)).
    pub fn mass_far(&self) -> PartialIntegral {
        match self {
            RadialMeasure::Atoms(atoms) => {
                PartialIntegral::finite(atoms.iter().filter(|a| a.at >= 1.0).map(|a| a.mass).sum())
            }
            RadialMeasure::Density(d) => {
                d.weighted_integral(|r| if r >= 1.0 { 1.0 } else { 0.0 }, f64::INFINITY)
            }
            RadialMeasure::CmRep(c) => {
                // int_1^inf r^(alpha-1) g(r^alpha) dr = (1/alpha) int_1^inf g(u) du
                let a = c.alpha;
                scan_tail(|u: f64| c.g(u) / a, 1.0, DEFAULT_TOL)
            }
            RadialMeasure::Sum(parts) => sum_partials(parts.iter().map(|p| p.mass_far())),
        }
    }

    /// int_(1,inf) (log r)^m nu(dr).
    pub fn log_moment(&self, m: u32) -> PartialIntegral {
        match self {
            RadialMeasure::Atoms(atoms) => PartialIntegral::finite(
                atoms
                    .iter()
                    .filter(|a| a.at > 1.0)
                    .map(|a| a.mass * a.at.ln().powi(m as i32))
                    .sum(),
            ),
            RadialMeasure::Density(d) => {
                let f = |r: f64| if r > 1.0 { r.ln().powi(m as i32) * d.at(r) } else { 0.0 };
                if d.hi().is_finite() {
                    if d.hi() <= 1.0 {
                        return PartialIntegral::finite(0.0);
                    }
                    match integrate_support(f, 1.0, d.hi(), DEFAULT_TOL) {
                        Ok(r) => PartialIntegral::finite(r.value),
                        _ => PartialIntegral::divergent(0.0),
                    }
                } else {
                    scan_tail(f, 1.0, DEFAULT_TOL)
                }
            }
            RadialMeasure::CmRep(c) => {
                let a = c.alpha;
                scan_tail(
                    |u: f64| (u.ln() / a).powi(m as i32) * c.g(u) / a,
                    1.0,
                    DEFAULT_TOL,
                )
            }
            RadialMeasure::Sum(parts) => sum_partials(parts.iter().map(|p| p.log_moment(m))),
        }
    }

    /// nu([r, inf)).
    pub fn tail_mass(&self, r: f64) -> PartialIntegral {
        match self {
            RadialMeasure::Atoms(atoms) => {
                PartialIntegral::finite(atoms.iter().filter(|a| a.at >= r).map(|a| a.mass).sum())
            }
            RadialMeasure::Density(d) => {
                if r >= d.hi() {
                    return PartialIntegral::finite(0.0);
                }
                let lo = r.max(d.lo());
                if d.hi().is_finite() {
                    match integrate_support(|x| d.at(x), lo, d.hi(), DEFAULT_TOL) {
                        Ok(q) => PartialIntegral::finite(q.value),
                        Err(Error::QuadratureNonConvergence { estimate, .. }) => PartialIntegral::finite(estimate),
                        Err(_) => PartialIntegral::divergent(0.0),
                    }
                } else {
                    scan_tail(|x| d.at(x), lo, DEFAULT_TOL)
                }
            }
            RadialMeasure::CmRep(c) => c.tail_mass(r),
            RadialMeasure::Sum(parts) => sum_partials(parts.iter().map(|p| p.tail_mass(r))),
        }
    }

    /// Total mass nu((0, inf)); finite only for finite-activity measures.
    pub fn total_mass(&self) -> PartialIntegral {
        match self {
            RadialMeasure::Atoms(atoms) => PartialIntegral::finite(atoms.iter().map(|a| a.mass).sum()),
            RadialMeasure::Density(d) => d.weighted_integral(|_| 1.0, 0.0),
            RadialMeasure::CmRep(c) => {
                // int_0^inf r^(a-1) g(r^a) dr = (1/a) int u^(1/a - 1) g(u) du
                let a = c.alpha;
                let f = |u: f64| u.powf(1.0 / a - 1.0) * c.g(u) / a;
                let near = scan_near_zero(f, 1.0, None, DEFAULT_TOL);
                let far = scan_tail(f, 1.0, DEFAULT_TOL);
                PartialIntegral {
                    value: near.value + far.value,
                    finite: near.finite && far.finite,
                }
            }
            RadialMeasure::Sum(parts) => sum_partials(parts.iter().map(|p| p.total_mass())),
        }
    }

    /// int_(0,1) r nu(dr): the bounded-variation integral near the origin.
    pub fn first_moment_near_zero(&self) -> PartialIntegral {
        match self {
            RadialMeasure::Atoms(atoms) => PartialIntegral::finite(
                atoms.iter().filter(|a| a.at < 1.0).map(|a| a.mass * a.at).sum(),
            ),
            RadialMeasure::Density(d) => {
                if d.lo() >= 1.0 {
                    return PartialIntegral::finite(0.0);
                }
                let clipped = |r: f64| if r < 1.0 { r * d.at(r) } else { 0.0 };
                let hint = d.near_zero_exponent().map(|p| p + 1.0);
                scan_near_zero(clipped, d.hi().min(1.0), hint, DEFAULT_TOL)
            }
            RadialMeasure::CmRep(c) => {
                // int_0^1 r^alpha g(r^alpha) dr = (1/alpha) int_0^1 u^(1/alpha) g(u) du
                let a = c.alpha;
                scan_near_zero(|u: f64| u.powf(1.0 / a) * c.g(u) / a, 1.0, None, DEFAULT_TOL)
            }
            RadialMeasure::Sum(parts) => sum_partials(parts.iter().map(|p| p.first_moment_near_zero())),
        }
    }

    /// int r / (1 + r^2) nu(dr): the centering mass (drift correction for
    /// compound Poisson constructions).
    pub fn centering_mass(&self) -> Result<f64> {
        match self {
            RadialMeasure::Atoms(atoms) => Ok(atoms.iter().map(|a| a.mass * a.at / (1.0 + a.at * a.at)).sum()),
            RadialMeasure::Density(d) => {
                let part = d.weighted_integral(|r| r / (1.0 + r * r), 1.0);
                if part.finite {
                    Ok(part.value)
                } else {
                    Err(Error::Divergent("centering mass".into()))
                }
            }
            RadialMeasure::CmRep(c) => {
                let f = |r: f64| r / (1.0 + r * r) * c.density_at(r);
                if let Ok(fast) = integrate_support(f, 0.0, f64::INFINITY, 1e-10) {
                    return Ok(fast.value);
                }
                let near = scan_near_zero(f, 1.0, None, DEFAULT_TOL);
                let far = scan_tail(f, 1.0, DEFAULT_TOL);
                if near.finite && far.finite {
                    Ok(near.value + far.value)
                } else {
                    Err(Error::Divergent("centering mass".into()))
                }
            }
            RadialMeasure::Sum(parts) => parts.iter().map(|p| p.centering_mass()).sum(),
        }
    }

    /// int r^3 (1 - u^2) / ((1 + u^2 r^2)(1 + r^2)) nu(dr), the inner factor
    /// of the gamma-correction integral under a scale change by u.
    pub fn centering_correction(&self, u: f64) -> Result<f64> {
        let kernel = |r: f64| r * r * r * (1.0 - u * u) / ((1.0 + u * u * r * r) * (1.0 + r * r));
        match self {
            RadialMeasure::Atoms(atoms) => Ok(atoms.iter().map(|a| a.mass * kernel(a.at)).sum()),
            RadialMeasure::Density(d) => {
                let part = d.weighted_integral(kernel, 3.0);
                if part.finite {
                    Ok(part.value)
                } else {
                    Err(Error::Divergent(format!("gamma correction at u = {u}")))
                }
            }
            RadialMeasure::CmRep(c) => {
                let f = |r: f64| kernel(r) * c.density_at(r);
                if let Ok(fast) = integrate_support(f, 0.0, f64::INFINITY, 1e-10) {
                    return Ok(fast.value);
                }
                let near = scan_near_zero(f, 1.0, None, DEFAULT_TOL);
                let far = scan_tail(f, 1.0, DEFAULT_TOL);
                if near.finite && far.finite {
                    Ok(near.value + far.value)
                } else {
                    Err(Error::Divergent(format!("gamma correction at u = {u}")))
                }
            }
            RadialMeasure::Sum(parts) => parts.iter().map(|p| p.centering_correction(u)).sum(),
        }
    }

    /// int (e^(i r theta) - 1 - i r theta / (1 + r^2)) nu(dr).
    pub fn cumulant_term(&self, theta: f64) -> Result<Complex64> {
        if theta == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let psi = |r: f64| {
            Complex64::new((r * theta).cos() - 1.0, (r * theta).sin() - r * theta / (1.0 + r * r))
        };
        match self {
            RadialMeasure::Atoms(atoms) => Ok(atoms.iter().map(|a| psi(a.at) * a.mass).sum()),
            RadialMeasure::Density(d) => {
                let (v, _) =
                    integrate_support_complex(|r| psi(r) * d.at(r), d.lo(), d.hi(), DEFAULT_TOL)?;
                Ok(v)
            }
            RadialMeasure::CmRep(c) => {
                let (v, _) =
                    integrate_support_complex(|r| psi(r) * c.density_at(r), 0.0, f64::INFINITY, DEFAULT_TOL)?;
                Ok(v)
            }
            RadialMeasure::Sum(parts) => parts.iter().map(|p| p.cumulant_term(theta)).sum(),
        }
    }
}

fn sum_partials(parts: impl Iterator<Item = PartialIntegral>) -> PartialIntegral {
    let mut acc = PartialIntegral::finite(0.0);
    for p in parts {
        acc.value += p.value;
        acc.finite &= p.finite;
    }
    acc
}

/// One spherical direction with its weight and radial component.
#[derive(Debug, Clone)]
pub struct Direction {
    pub xi: Vec<f64>,
    pub weight: f64,
    pub radial: RadialMeasure,
}

/// Polar-decomposed Levy measure with finite spherical support.
#[derive(Debug, Clone, Default)]
pub struct LevyMeasure {
    directions: Vec<Direction>,
}

/// Report of the Levy integrability check int (r^2 and 1) nu(dr) < inf.
#[derive(Debug, Clone, Copy)]
pub struct LevyReport {
    pub ok: bool,
    pub mass2_near_0: PartialIntegral,
    pub mass_far: PartialIntegral,
}

impl LevyMeasure {
    pub fn new(directions: Vec<Direction>) -> Result<Self> {
        for d in &directions {
            let dim = d.xi.len();
            if !(1..=3).contains(&dim) {
                return Err(Error::invalid("direction", format!("dimension {dim} outside 1..=3")));
            }
            let norm2: f64 = d.xi.iter().map(|x| x * x).sum();
            if (norm2.sqrt() - 1.0).abs() > 1e-12 {
                return Err(Error::invalid(
                    "direction",
                    format!("|xi| must be 1 within 1e-12, got |xi| = {}", norm2.sqrt()),
                ));
            }
            if dim == 1 && d.xi[0].abs() != 1.0 {
                return Err(Error::invalid("direction", "for d = 1 directions must be -1 or +1"));
            }
            if !(d.weight > 0.0) || !d.weight.is_finite() {
                return Err(Error::invalid("direction", format!("weight must be positive, got {}", d.weight)));
            }
            d.radial.validate()?;
        }
        let dims: Vec<usize> = directions.iter().map(|d| d.xi.len()).collect();
        if let Some(&first) = dims.first() {
            if dims.iter().any(|&d| d != first) {
                return Err(Error::invalid("levy measure", "directions of mixed dimension"));
            }
        }
        Ok(LevyMeasure { directions })
    }

    pub fn zero() -> Self {
        LevyMeasure::default()
    }

    /// One-sided measure on the positive axis (d = 1).
    pub fn one_sided(radial: RadialMeasure) -> Self {
        LevyMeasure {
            directions: vec![Direction {
                xi: vec![1.0],
                weight: 1.0,
                radial,
            }],
        }
    }

    /// Mirror-symmetric measure with the same radial part on both directions (d = 1).
    pub fn symmetric_1d(radial: RadialMeasure) -> Self {
        LevyMeasure {
            directions: vec![
                Direction {
                    xi: vec![1.0],
                    weight: 1.0,
                    radial: radial.clone(),
                },
                Direction {
                    xi: vec![-1.0],
                    weight: 1.0,
                    radial,
                },
            ],
        }
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn dim(&self) -> Option<usize> {
        self.directions.first().map(|d| d.xi.len())
    }

    pub fn is_zero(&self) -> bool {
        self.directions.iter().all(|d| d.radial.is_zero())
    }

    /// int (r^2 and 1) nu(dr) < inf, reported in its two halves.
    pub fn validate(&self) -> LevyReport {
        let near = sum_partials(
            self.directions
                .iter()
                .map(|d| scale_partial(d.radial.mass2_near_zero(), d.weight)),
        );
        let far = sum_partials(
            self.directions
                .iter()
                .map(|d| scale_partial(d.radial.mass_far(), d.weight)),
        );
        LevyReport {
            ok: near.finite && far.finite,
            mass2_near_0: near,
            mass_far: far,
        }
    }

    /// True iff int_(|x|>1) (log |x|)^m nu(dx) < inf.
    pub fn log_moment_finite(&self, m: u32) -> bool {
        self.directions.iter().all(|d| d.radial.log_moment(m).finite)
    }

    /// Map every radial part through `f`, keeping directions and weights.
    pub fn map_radial(&self, f: impl Fn(&RadialMeasure) -> Result<RadialMeasure>) -> Result<LevyMeasure> {
        let directions = self
            .directions
            .iter()
            .map(|d| {
                Ok(Direction {
                    xi: d.xi.clone(),
                    weight: d.weight,
                    radial: f(&d.radial)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LevyMeasure { directions })
    }

    fn merged_tail(&self, xi: &[f64], r: f64) -> f64 {
        self.directions
            .iter()
            .filter(|d| same_direction(&d.xi, xi))
            .map(|d| d.weight * d.radial.tail_mass(r).value)
            .sum()
    }

    /// nu(B) = nu(-B) on the canonical family of tail sets
    /// {x : x/|x| = xi, |x| >= r}, r in a fixed grid.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        const TAIL_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
        for d in &self.directions {
            if d.radial.is_zero() {
                continue;
            }
            let neg: Vec<f64> = d.xi.iter().map(|x| -x).collect();
            for &r in &TAIL_GRID {
                let plus = self.merged_tail(&d.xi, r);
                let minus = self.merged_tail(&neg, r);
                if (plus - minus).abs() > tol * (1.0 + plus.abs().max(minus.abs())) {
                    return false;
                }
            }
        }
        true
    }
}

fn scale_partial(mut p: PartialIntegral, c: f64) -> PartialIntegral {
    p.value *= c;
    p
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9)
}

/// Generating triplet (A, nu, gamma) of an infinitely divisible law.
#[derive(Debug, Clone)]
pub struct GeneratingTriplet {
    dim: usize,
    gaussian: Vec<f64>,
    levy: LevyMeasure,
    gamma: Vec<f64>,
}

impl GeneratingTriplet {
    pub fn new(dim: usize, gaussian: Vec<f64>, levy: LevyMeasure, gamma: Vec<f64>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid("triplet", format!("dimension {dim} outside 1..=3")));
        }
        if gaussian.len() != dim * dim {
            return Err(Error::DimensionMismatch(gaussian.len(), dim * dim));
        }
        if gamma.len() != dim {
            return Err(Error::DimensionMismatch(gamma.len(), dim));
        }
        if gamma.iter().chain(gaussian.iter()).any(|v| !v.is_finite()) {
            return Err(Error::invalid("triplet", "non-finite entries"));
        }
        let scale = gaussian.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for i in 0..dim {
            for j in (i + 1)..dim {
                if (gaussian[i * dim + j] - gaussian[j * dim + i]).abs() > 1e-12 * (1.0 + scale) {
                    return Err(Error::invalid("gaussian part", "matrix not symmetric"));
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| gaussian[i * dim + i]).sum();
        let min_eig = sym_eigen_min(&gaussian, dim);
        if min_eig < -1e-12 * trace.abs().max(1.0) {
            return Err(Error::invalid(
                "gaussian part",
                format!("not positive semidefinite (min eigenvalue {min_eig:e})"),
            ));
        }
        if let Some(ld) = levy.dim() {
            if ld != dim {
                return Err(Error::DimensionMismatch(ld, dim));
            }
        }
        let report = levy.validate();
        if !report.ok {
            return Err(Error::invalid(
                "levy measure",
                format!(
                    "fails int (r^2 and 1) nu(dr) < inf: near-0 part {} ({}), far part {} ({})",
                    report.mass2_near_0.value,
                    if report.mass2_near_0.finite { "finite" } else { "divergent" },
                    report.mass_far.value,
                    if report.mass_far.finite { "finite" } else { "divergent" },
                ),
            ));
        }
        Ok(GeneratingTriplet {
            dim,
            gaussian,
            levy,
            gamma,
        })
    }

    /// The delta_0 triplet (0, 0, 0).
    pub fn dirac_zero(dim: usize) -> Self {
        GeneratingTriplet {
            dim,
            gaussian: vec![0.0; dim * dim],
            levy: LevyMeasure::zero(),
            gamma: vec![0.0; dim],
        }
    }

    /// Centered one-dimensional Gaussian with variance a.
    pub fn gaussian_1d(a: f64) -> Self {
        GeneratingTriplet {
            dim: 1,
            gaussian: vec![a],
            levy: LevyMeasure::zero(),
            gamma: vec![0.0],
        }
    }

    /// One-dimensional pure-jump triplet with the given Levy measure and
    /// explicit gamma.
    pub fn jump_1d(levy: LevyMeasure, gamma: f64) -> Result<Self> {
        GeneratingTriplet::new(1, vec![0.0], levy, vec![gamma])
    }

    /// One-dimensional compound Poisson law with zero drift: gamma is set to
    /// the centering mass so the process is the bare jump sum.
    pub fn compound_poisson_1d(levy: LevyMeasure) -> Result<Self> {
        let mut gamma = 0.0;
        for d in levy.directions() {
            gamma += d.xi[0] * d.weight * d.radial.centering_mass()?;
        }
        GeneratingTriplet::new(1, vec![0.0], levy, vec![gamma])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gaussian(&self) -> &[f64] {
        &self.gaussian
    }

    pub fn levy(&self) -> &LevyMeasure {
        &self.levy
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    /// Drift of the corresponding Levy process when it has bounded variation
    /// and no Gaussian part: b = gamma - int x/(1+|x|^2) nu(dx).
    pub fn drift_1d(&self) -> Result<f64> {
        if self.dim != 1 {
            return Err(Error::Unsupported("drift only defined here for d = 1".into()));
        }
        let mut centering = 0.0;
        for d in self.levy.directions() {
            centering += d.xi[0] * d.weight * d.radial.centering_mass()?;
        }
        Ok(self.gamma[0] - centering)
    }

    /// The cumulant C_mu(z): continuous logarithm of the characteristic
    /// function with C_mu(0) = 0.
    pub fn cumulant(&self, z: &[f64]) -> Result<Complex64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch(z.len(), self.dim));
        }
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cumulant argument", "non-finite z"));
        }
        let quad: f64 = (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| z[i] * self.gaussian[i * self.dim + j] * z[j])
                    .sum::<f64>()
            })
            .sum();
        let linear: f64 = self.gamma.iter().zip(z).map(|(g, zi)| g * zi).sum();
        let mut c = Complex64::new(-0.5 * quad, linear);
        for d in self.levy.directions() {
            let theta: f64 = d.xi.iter().zip(z).map(|(x, zi)| x * zi).sum();
            c += d.radial.cumulant_term(theta)? * d.weight;
        }
        Ok(c)
    }

    /// Convolution: sum of Gaussian parts and gammas, union of Levy measures.
    pub fn convolve(&self, other: &GeneratingTriplet) -> Result<GeneratingTriplet> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let gaussian = self
            .gaussian
            .iter()
            .zip(&other.gaussian)
            .map(|(a, b)| a + b)
            .collect();
        let gamma = self.gamma.iter().zip(&other.gamma).map(|(a, b)| a + b).collect();
        let mut directions = self.levy.directions().to_vec();
        directions.extend(other.levy.directions().iter().cloned());
        Ok(GeneratingTriplet {
            dim: self.dim,
            gaussian,
            levy: LevyMeasure { directions },
            gamma,
        })
    }

    /// Symmetry of the law: gamma = 0 and nu symmetric, both within tol.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.gamma.iter().all(|g| g.abs() <= tol) && self.levy.is_symmetric(tol)
    }
}

/// Smallest eigenvalue of a symmetric d x d matrix (d <= 3), cyclic Jacobi.
fn sym_eigen_min(a: &[f64], d: usize) -> f64 {
    if d == 1 {
        return a[0];
    }
    let mut m = a.to_vec();
    for _ in 0..200 {
        let (mut p, mut q, mut mx) = (0usize, 1usize, 0.0_f64);
        for i in 0..d {
            for j in (i + 1)..d {
                if m[i * d + j].abs() > mx {
                    mx = m[i * d + j].abs();
                    p = i;
                    q = j;
                }
            }
        }
        let scale: f64 = (0..d).map(|i| m[i * d + i].abs()).sum::<f64>() + 1e-300;
        if mx <= 1e-15 * scale {
            break;
        }
        let app = m[p * d + p];
        let aqq = m[q * d + q];
        let apq = m[p * d + q];
        let theta = 0.5 * (aqq - app) / apq;
        let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
        let c = 1.0 / (t * t + 1.0).sqrt();
        let s = t * c;
        for k in 0..d {
            let akp = m[k * d + p];
            let akq = m[k * d + q];
            m[k * d + p] = c * akp - s * akq;
            m[k * d + q] = s * akp + c * akq;
        }
        for k in 0..d {
            let apk = m[p * d + k];
            let aqk = m[q * d + k];
            m[p * d + k] = c * apk - s * aqk;
            m[q * d + k] = s * apk + c * aqk;
        }
    }
    (0..d).map(|i| m[i * d + i]).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cp_dirac_plus_one() -> GeneratingTriplet {
        // (A = 0, nu = delta_{+1} weight 1, gamma = 1/2)
        GeneratingTriplet::jump_1d(LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0)), 0.5).unwrap()
    }

    #[test]
    fn cumulant_pure_gaussian() {
        let mu = GeneratingTriplet::gaussian_1d(1.0);
        let c = mu.cumulant(&[2.0]).unwrap();
        assert_relative_eq!(c.re, -2.0, epsilon = 1e-14);
        assert_relative_eq!(c.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn cumulant_one_atom_closed_form() {
        // gamma = 1/2 cancels the centering term: C(z) = e^{iz} - 1
        let mu = cp_dirac_plus_one();
        for z in [-2.0, -0.5, 1.0, 3.0] {
            let c = mu.cumulant(&[z]).unwrap();
            assert_relative_eq!(c.re, z.cos() - 1.0, epsilon = 1e-13);
            assert_relative_eq!(c.im, z.sin(), epsilon = 1e-13);
        }
    }

    #[test]
    fn cumulant_of_dirac_zero_vanishes() {
        let mu = GeneratingTriplet::dirac_zero(1);
        for z in [-3.0, 0.0, 0.7] {
            let c = mu.cumulant(&[z]).unwrap();
            assert_eq!(c, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn cumulant_at_zero_is_exactly_zero() {
        let density = RadialMeasure::density_expr("r^(-1/2)*exp(-r)", 0.0, f64::INFINITY, Some(-0.5)).unwrap();
        let candidates = vec![
            GeneratingTriplet::gaussian_1d(2.5),
            cp_dirac_plus_one(),
            GeneratingTriplet::jump_1d(LevyMeasure::symmetric_1d(density), 0.3).unwrap(),
        ];
        for mu in candidates {
            assert_eq!(mu.cumulant(&[0.0]).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn validate_levy_examples() {
        // delta_{+1}: ok, far mass exactly 1
        let nu = LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0));
        let rep = nu.validate();
        assert!(rep.ok);
        assert_eq!(rep.mass_far.value, 1.0);
        assert_eq!(rep.mass2_near_0.value, 0.0);

        // density r^(-1/2) e^-r: integrable (oracle: direct quadrature)
        let nu = LevyMeasure::one_sided(
            RadialMeasure::density_expr("r^(-1/2)*exp(-r)", 0.0, f64::INFINITY, Some(-0.5)).unwrap(),
        );
        let rep = nu.validate();
        assert!(rep.ok, "report: {rep:?}");
        let oracle = crate::numerics::integrate_finite(
            |r: f64| r * r * r.powf(-0.5) * (-r).exp(),
            0.0,
            1.0,
            1e-12,
        )
        .unwrap()
        .value;
        assert_relative_eq!(rep.mass2_near_0.value, oracle, max_relative = 1e-7);

        // density r^-3 near 0: int_0^1 r^2 r^-3 dr diverges
        let nu = LevyMeasure::one_sided(RadialMeasure::density_expr("r^(-3)", 0.0, 1.0, None).unwrap());
        let rep = nu.validate();
        assert!(!rep.ok);
        assert!(!rep.mass2_near_0.finite);
    }

    #[test]
    fn validate_matches_closed_form_on_atoms() {
        let atoms = vec![
            MassAtom { at: 0.25, mass: 2.0 },
            MassAtom { at: 0.5, mass: 1.0 },
            MassAtom { at: 3.0, mass: 0.5 },
        ];
        let nu = LevyMeasure::one_sided(RadialMeasure::Atoms(atoms.clone()));
        let rep = nu.validate();
        let near: f64 = atoms.iter().filter(|a| a.at < 1.0).map(|a| a.mass * a.at * a.at).sum();
        let far: f64 = atoms.iter().filter(|a| a.at >= 1.0).map(|a| a.mass).sum();
        assert_eq!(rep.mass2_near_0.value, near);
        assert_eq!(rep.mass_far.value, far);
        assert!(rep.ok);
    }

    #[test]
    fn log_moment_examples() {
        // compact support: all log moments finite
        let nu = LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0));
        for m in 1..=3 {
            assert!(nu.log_moment_finite(m));
        }

        // density r^-2 on r > 1: finite for all m
        let nu = LevyMeasure::one_sided(RadialMeasure::density_expr("r^(-2)", 1.0, f64::INFINITY, None).unwrap());
        assert!(nu.log_moment_finite(1));
        assert!(nu.log_moment_finite(2));

        // harmonic divergence: density 1/(r log^2 r) on (e, inf) has finite
        // mass but int log r * density dr = int dr/(r log r) = inf
        let nu = LevyMeasure::one_sided(
            RadialMeasure::density_expr("1/(r*log(r)^2)", std::f64::consts::E, f64::INFINITY, None).unwrap(),
        );
        let rep = nu.validate();
        assert!(rep.ok, "measure itself is a valid Levy measure");
        assert!(!nu.log_moment_finite(1));
    }

    #[test]
    fn convolve_examples() {
        let cp = GeneratingTriplet::jump_1d(LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0)), 0.0).unwrap();
        let two = cp.convolve(&cp).unwrap();
        let tail = two
            .levy()
            .directions()
            .iter()
            .map(|d| d.weight * d.radial.tail_mass(1.0).value)
            .sum::<f64>();
        assert_eq!(tail, 2.0);

        let g1 = GeneratingTriplet::gaussian_1d(1.0);
        let g2 = GeneratingTriplet::gaussian_1d(2.0);
        assert_eq!(g1.convolve(&g2).unwrap().gaussian()[0], 3.0);

        let id = GeneratingTriplet::dirac_zero(1);
        let back = cp.convolve(&id).unwrap();
        for z in [-1.0, 0.5, 2.0] {
            let a = back.cumulant(&[z]).unwrap();
            let b = cp.cumulant(&[z]).unwrap();
            assert_relative_eq!(a.re, b.re, epsilon = 1e-12);
            assert_relative_eq!(a.im, b.im, epsilon = 1e-12);
        }

        let g3 = GeneratingTriplet::dirac_zero(2);
        assert!(g1.convolve(&g3).is_err());
    }

    #[test]
    fn convolution_adds_cumulants() {
        let a = cp_dirac_plus_one();
        let b = GeneratingTriplet::gaussian_1d(0.7);
        let c = a.convolve(&b).unwrap();
        let mut z = -4.0;
        while z <= 4.0 {
            let lhs = c.cumulant(&[z]).unwrap();
            let rhs = a.cumulant(&[z]).unwrap() + b.cumulant(&[z]).unwrap();
            assert!((lhs - rhs).norm() <= 1e-10, "at z = {z}");
            z += 0.8;
        }
    }

    #[test]
    fn symmetry_examples() {
        let sym = GeneratingTriplet::jump_1d(
            LevyMeasure::symmetric_1d(RadialMeasure::atom(1.0, 1.0)),
            0.0,
        )
        .unwrap();
        assert!(sym.is_symmetric(1e-9));

        let one_sided =
            GeneratingTriplet::jump_1d(LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0)), 0.0).unwrap();
        assert!(!one_sided.is_symmetric(1e-9));

        let shifted = GeneratingTriplet::jump_1d(
            LevyMeasure::symmetric_1d(RadialMeasure::atom(1.0, 1.0)),
            1e-3,
        )
        .unwrap();
        assert!(!shifted.is_symmetric(1e-6));
    }

    #[test]
    fn symmetric_law_has_real_even_cumulant() {
        let density = RadialMeasure::density_expr("exp(-r)", 0.0, f64::INFINITY, Some(0.0)).unwrap();
        let mu = GeneratingTriplet::jump_1d(LevyMeasure::symmetric_1d(density), 0.0).unwrap();
        assert!(mu.is_symmetric(1e-9));
        for z in [0.3, 1.0, 2.5, 4.0] {
            let plus = mu.cumulant(&[z]).unwrap();
            let minus = mu.cumulant(&[-z]).unwrap();
            assert!(plus.im.abs() <= 1e-10, "imaginary part at z = {z}: {}", plus.im);
            assert!((plus - minus).norm() <= 1e-10, "evenness at z = {z}");
        }
    }

    #[test]
    fn psd_validation_catches_bad_gaussian() {
        let bad = GeneratingTriplet::new(
            2,
            vec![1.0, 2.0, 2.0, 1.0], // eigenvalues 3 and -1
            LevyMeasure::zero(),
            vec![0.0, 0.0],
        );
        assert!(bad.is_err());

        let ok = GeneratingTriplet::new(
            2,
            vec![2.0, 1.0, 1.0, 2.0],
            LevyMeasure::zero(),
            vec![0.0, 0.0],
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn two_dimensional_cumulant_matches_directional_sum() {
        let e1 = Direction {
            xi: vec![1.0, 0.0],
            weight: 2.0,
            radial: RadialMeasure::atom(1.5, 1.0),
        };
        let mu = GeneratingTriplet::new(
            2,
            vec![1.0, 0.0, 0.0, 0.5],
            LevyMeasure::new(vec![e1]).unwrap(),
            vec![0.0, 0.25],
        )
        .unwrap();
        let z = [0.8, -1.1];
        let c = mu.cumulant(&z).unwrap();
        let theta: f64 = 0.8 * 1.5; // <z, 1.5 * e1>
        let expect_jump_re = 2.0 * ((theta).cos() - 1.0);
        let expect_jump_im = 2.0 * ((theta).sin() - theta / (1.0 + 1.5 * 1.5));
        let quad = 0.8 * 0.8 * 1.0 + 1.1 * 1.1 * 0.5;
        assert_relative_eq!(c.re, -0.5 * quad + expect_jump_re, epsilon = 1e-12);
        assert_relative_eq!(c.im, 0.25 * -1.1 + expect_jump_im, epsilon = 1e-12);
    }

    #[test]
    fn core_values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<GeneratingTriplet>();
        assert_send_sync::<LevyMeasure>();
        assert_send_sync::<RadialMeasure>();
        assert_send_sync::<MixingMeasure>();
        assert_send_sync::<SupportedDensity>();
    }

    #[test]
    fn cmrep_tail_and_density_are_consistent() {
        // Q = delta_1, alpha = 1: density e^-r, tail e^-r
        let rep = CmRep::new(1.0, MixingMeasure::dirac(1.0, 1.0)).unwrap();
        assert_relative_eq!(rep.density_at(2.0), (-2.0_f64).exp(), epsilon = 1e-14);
        assert_relative_eq!(rep.tail_mass(2.0).value, (-2.0_f64).exp(), epsilon = 1e-12);

        // differentiating the tail recovers the density
        let r = 1.3_f64;
        let h = 1e-5;
        let numerical = -(rep.tail_mass(r + h).value - rep.tail_mass(r - h).value) / (2.0 * h);
        assert_relative_eq!(numerical, rep.density_at(r), max_relative = 1e-8);
    }
}
