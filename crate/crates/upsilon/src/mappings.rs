//! Stochastic-integral mappings acting on generating triplets: E_alpha,
//! Phi, Psi, M and N_alpha, realized as scale mixtures of the Levy measure.
//!
//! Each kernel f on (0, T) induces, by the change of variables u = f(t),
//! a scale density w(u) with
//!     A~ = (int f^2) A,
//!     nu~(B) = int nu(u^-1 B) w(u) du,
//!     gamma~ = (int f) gamma + int w(u) u [int x (1/(1+|ux|^2) - 1/(1+|x|^2)) nu(dx)] du,
//! and the transformed cumulant int C_mu(u z) w(u) du. Triplet-level
//! transforms are the primary route; the cumulant-level quadrature is kept
//! as an independent cross-check.

use std::sync::Arc;

use num_complex::Complex64;

use crate::classes::radial_of_transform;
pub use crate::classes::{embed_e_alpha_in_e_beta, EmbeddedCm};
use crate::error::{Error, Result};
use crate::numerics::{
    exp_integral_e1, gamma_fn, integrate_support, integrate_support_complex, invert_monotone,
    scan_tail, IntegralTable, EULER_GAMMA, NESTED_TOL,
};
use crate::triplet::{GeneratingTriplet, RadialMeasure, SupportedDensity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    /// f(t) = (log 1/t)^(1/alpha) on (0, 1].
    EAlpha(f64),
    /// f(t) = e^-t on (0, inf).
    Phi,
    /// f(t) = n_alpha^*(t) on (0, inf), the inverse of
    /// n_alpha(x) = int_x^inf u^-1 e^(-u^alpha) du = E1(x^alpha)/alpha.
    NAlpha(f64),
}

/// Kernel names accepted by `make_kernel`; Psi and M are the fixed
/// compositions N_1 and N_2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelName {
    EAlpha,
    Phi,
    Psi,
    M,
    NAlpha,
}

/// A mapping kernel with its eagerly cached integrals and, for N_alpha,
/// the inversion seed table.
pub struct Kernel {
    kind: KernelKind,
    squared_integral: f64,
    first_integral: f64,
    n_table: Option<NTable>,
}

/// Seed table for inverting n_alpha: x nodes keyed by E1(x^alpha), which
/// decreases in x. 1024 nodes cover E1 arguments in [1e-10, 45].
struct NTable {
    alpha: f64,
    // E1(x^alpha), ascending
    e1_nodes: Vec<f64>,
    x_nodes: Vec<f64>,
}

impl NTable {
    fn build(alpha: f64) -> Result<NTable> {
        let n = 1024;
        let (u_lo, u_hi) = (1e-10_f64, 45.0_f64);
        let (l, h) = (u_lo.ln(), u_hi.ln());
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let u = (l + (h - l) * i as f64 / (n as f64 - 1.0)).exp();
                let x = u.powf(1.0 / alpha);
                let e1 = exp_integral_e1(u).expect("u > 0");
                (e1, x)
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(NTable {
            alpha,
            e1_nodes: pairs.iter().map(|p| p.0).collect(),
            x_nodes: pairs.iter().map(|p| p.1).collect(),
        })
    }

    /// n_alpha^*(t) = (E1^-1(alpha t))^(1/alpha).
    fn evaluate(&self, t: f64) -> f64 {
        if !(t > 0.0) {
            return f64::INFINITY;
        }
        let alpha = self.alpha;
        let target = alpha * t;
        let n = self.e1_nodes.len();
        let i = self.e1_nodes.partition_point(|&v| v < target);
        if i == 0 {
            // beyond the table: E1(u) tiny, asymptotic
            // E1(u) ~ e^-u/u (1 - 1/u + 2/u^2 - ...)
            let mut u = 2.0_f64.max(-target.ln());
            for _ in 0..60 {
                let correction = (1.0 - 1.0 / u + 2.0 / (u * u)).max(0.1);
                let next = -(target * u / correction).ln();
                if (next - u).abs() <= 1e-14 * u {
                    u = next;
                    break;
                }
                u = next;
            }
            // polish with exact E1 while e^-u is representable
            for _ in 0..4 {
                let emu = (-u).exp();
                if emu == 0.0 {
                    break;
                }
                if let Ok(e1) = exp_integral_e1(u) {
                    // E1'(u) = -e^-u / u
                    let step = (e1 - target) * u / emu;
                    let next = u + step;
                    if !(next > 0.0) || !next.is_finite() {
                        break;
                    }
                    let done = (next - u).abs() <= 1e-15 * u;
                    u = next;
                    if done {
                        break;
                    }
                }
            }
            return u.powf(1.0 / alpha);
        }
        if i >= n {
            // E1(u) large: series E1(u) ~ -gamma - ln u, refine by Newton
            let mut u = (-EULER_GAMMA - target).exp();
            for _ in 0..8 {
                if !(u > 0.0) || !u.is_finite() {
                    break;
                }
                match exp_integral_e1(u) {
                    Ok(e1) => {
                        // E1'(u) = -e^-u / u
                        let step = (e1 - target) * u / (-u).exp();
                        let next = u + step;
                        if next > 0.0 && (next - u).abs() <= 1e-15 * u {
                            u = next;
                            break;
                        }
                        if next > 0.0 {
                            u = next;
                        } else {
                            u *= 0.5;
                        }
                    }
                    Err(_) => break,
                }
            }
            return u.powf(1.0 / alpha);
        }
        // bracketed between adjacent table nodes (x descending in t)
        let (lo, hi) = (
            self.x_nodes[i].min(self.x_nodes[i - 1]) * 0.999,
            self.x_nodes[i].max(self.x_nodes[i - 1]) * 1.001,
        );
        invert_monotone(
            |x: f64| exp_integral_e1(x.powf(alpha)).unwrap_or(f64::NAN),
            target,
            lo,
            hi,
            1e-13 * target.max(1e-200),
        )
        .unwrap_or(0.5 * (lo + hi))
    }
}

/// Build a kernel; `alpha` is required for E_alpha and N_alpha and ignored
/// for the fixed kernels.
pub fn make_kernel(name: KernelName, alpha: Option<f64>) -> Result<Kernel> {
    let need_alpha = || {
        alpha.ok_or_else(|| Error::invalid("kernel", "this kernel needs an alpha parameter")).and_then(|a| {
            if a > 0.0 {
                Ok(a)
            } else {
                Err(Error::invalid("kernel", format!("need alpha > 0, got {a}")))
            }
        })
    };
    let kind = match name {
        KernelName::EAlpha => KernelKind::EAlpha(need_alpha()?),
        KernelName::Phi => KernelKind::Phi,
        KernelName::Psi => KernelKind::NAlpha(1.0),
        KernelName::M => KernelKind::NAlpha(2.0),
        KernelName::NAlpha => KernelKind::NAlpha(need_alpha()?),
    };
    Kernel::new(kind)
}

impl Kernel {
    pub fn new(kind: KernelKind) -> Result<Kernel> {
        let (squared_integral, first_integral, n_table) = match kind {
            KernelKind::EAlpha(a) => {
                if !(a > 0.0) {
                    return Err(Error::invalid("kernel", format!("need alpha > 0, got {a}")));
                }
                (gamma_fn(1.0 + 2.0 / a)?, gamma_fn(1.0 + 1.0 / a)?, None)
            }
            KernelKind::Phi => (0.5, 1.0, None),
            KernelKind::NAlpha(a) => {
                if !(a > 0.0) {
                    return Err(Error::invalid("kernel", format!("need alpha > 0, got {a}")));
                }
                // int (n^*)^2 = int_0^inf x e^(-x^a) dx = Gamma(1+2/a)/2
                // int n^*     = int_0^inf e^(-x^a) dx = Gamma(1+1/a)
                (
                    gamma_fn(1.0 + 2.0 / a)? / 2.0,
                    gamma_fn(1.0 + 1.0 / a)?,
                    Some(NTable::build(a)?),
                )
            }
        };
        Ok(Kernel {
            kind,
            squared_integral,
            first_integral,
            n_table,
        })
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// f(t) on the kernel's own time support.
    pub fn evaluate(&self, t: f64) -> f64 {
        match &self.kind {
            KernelKind::EAlpha(a) => {
                if t <= 0.0 {
                    f64::INFINITY
                } else if t > 1.0 {
                    0.0
                } else {
                    (1.0 / t).ln().max(0.0).powf(1.0 / a)
                }
            }
            KernelKind::Phi => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-t).exp()
                }
            }
            KernelKind::NAlpha(_) => self.n_table.as_ref().expect("built with kind").evaluate(t),
        }
    }

    /// Time support (0, T) of the kernel.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            KernelKind::EAlpha(_) => (0.0, 1.0),
            KernelKind::Phi | KernelKind::NAlpha(_) => (0.0, f64::INFINITY),
        }
    }

    /// Cached int f^2 dt; the Gaussian part scales by this factor.
    pub fn squared_integral(&self) -> f64 {
        self.squared_integral
    }

    /// Cached int f dt; gamma scales by this factor.
    pub fn first_integral(&self) -> f64 {
        self.first_integral
    }

    pub fn requires_log_moment(&self) -> bool {
        matches!(self.kind, KernelKind::Phi | KernelKind::NAlpha(_))
    }

    /// The density w(u) of the image of Lebesgue measure under f:
    /// nu~(B) = int nu(u^-1 B) w(u) du.
    pub fn scale_density(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match self.kind {
            KernelKind::EAlpha(a) => a * u.powf(a - 1.0) * (-u.powf(a)).exp(),
            KernelKind::Phi => {
                if u < 1.0 {
                    1.0 / u
                } else {
                    0.0
                }
            }
            KernelKind::NAlpha(a) => (-u.powf(a)).exp() / u,
        }
    }

    /// Support of the scale density in u.
    pub fn scale_support(&self) -> (f64, f64) {
        match self.kind {
            KernelKind::EAlpha(_) | KernelKind::NAlpha(_) => (0.0, f64::INFINITY),
            KernelKind::Phi => (0.0, 1.0),
        }
    }
}

fn ensure_log_moment(kernel: &Kernel, mu: &GeneratingTriplet) -> Result<()> {
    if kernel.requires_log_moment() && !mu.levy().log_moment_finite(1) {
        return Err(Error::DomainViolation(
            "the Levy measure has no finite log-moment: the law lies outside I_log, \
             where Phi and N_alpha are defined (log-moments are preserved by E_alpha, \
             so no E_alpha preimage helps)"
                .into(),
        ));
    }
    Ok(())
}

/// Tail function nu([y, inf)) of a radial measure as a cheap closure;
/// density parts are cached in a cumulative table.
fn tail_closure(radial: &RadialMeasure) -> Result<Arc<dyn Fn(f64) -> f64 + Send + Sync>> {
    match radial {
        RadialMeasure::Atoms(atoms) => {
            let mut sorted = atoms.clone();
            sorted.sort_by(|a, b| a.at.total_cmp(&b.at));
            // suffix sums: tail(y) = sum of masses at radii >= y
            let mut suffix: Vec<f64> = sorted.iter().map(|a| a.mass).collect();
            for i in (0..suffix.len().saturating_sub(1)).rev() {
                suffix[i] += suffix[i + 1];
            }
            let locations: Vec<f64> = sorted.iter().map(|a| a.at).collect();
            Ok(Arc::new(move |y: f64| {
                let i = locations.partition_point(|&at| at < y);
                if i < suffix.len() {
                    suffix[i]
                } else {
                    0.0
                }
            }))
        }
        RadialMeasure::Density(d) => {
            // cache the bulk in a cumulative table; keep the (possibly
            // slowly decaying) remainder explicit so nothing is discarded
            let (hi_cap, remainder) = if d.hi().is_finite() {
                (d.hi(), 0.0)
            } else {
                let mut cap = 1.0_f64.max(d.lo() * 2.0);
                loop {
                    let rem = scan_tail(|r| d.at(r), cap, 1e-13);
                    if !rem.finite {
                        return Err(Error::Divergent("radial tail mass".into()));
                    }
                    if rem.value < 1e-13 || cap > 1e9 {
                        break (cap, rem.value);
                    }
                    cap *= 16.0;
                }
            };
            // local decay exponent at the cap, for O(1) extrapolation of
            // the (tiny) tail beyond it
            let tail_exponent = {
                let (a, b) = (d.at(0.5 * hi_cap), d.at(hi_cap));
                if a > 0.0 && b > 0.0 && b < a {
                    ((a / b).ln() / (2.0_f64).ln()).max(1.1)
                } else {
                    3.0
                }
            };
            let dd = d.clone();
            let table = Arc::new(IntegralTable::build(&|r| dd.at(r), d.lo(), hi_cap, 1e-12)?);
            let dd2 = d.clone();
            Ok(Arc::new(move |y: f64| {
                if y >= hi_cap {
                    // the remainder is < 1e-13 of the mass unless the cap was
                    // forced; a power-law extrapolation keeps far probes O(1)
                    remainder * (y / hi_cap).powf(1.0 - tail_exponent)
                } else {
                    table.from_point(&|r| dd2.at(r), y.max(0.0)) + remainder
                }
            }))
        }
        RadialMeasure::CmRep(rep) => {
            let rep = rep.clone();
            Ok(Arc::new(move |y: f64| {
                if y <= 0.0 {
                    rep.tail_mass(1e-300).value
                } else {
                    rep.tail_mass(y).value
                }
            }))
        }
        RadialMeasure::Sum(parts) => {
            let closures = parts.iter().map(tail_closure).collect::<Result<Vec<_>>>()?;
            Ok(Arc::new(move |y: f64| closures.iter().map(|c| c(y)).sum()))
        }
    }
}

/// nu~_xi for the Phi kernel: density y^-1 nu_xi([y, inf)).
fn phi_radial(radial: &RadialMeasure) -> Result<RadialMeasure> {
    if radial.is_zero() {
        return Ok(RadialMeasure::zero());
    }
    let tail = tail_closure(radial)?;
    let hi = radial_support_end(radial);
    let mass = radial.total_mass();
    let hint = if mass.finite { Some(-1.0) } else { None };
    Ok(RadialMeasure::Density(SupportedDensity::from_fn(
        move |y: f64| tail(y) / y,
        0.0,
        hi,
        hint,
    )))
}

/// nu~_xi for the N_alpha kernel: density y^-1 int e^(-(y/v)^alpha) nu_xi(dv).
fn n_alpha_radial(radial: &RadialMeasure, alpha: f64) -> Result<RadialMeasure> {
    if radial.is_zero() {
        return Ok(RadialMeasure::zero());
    }
    let mass = radial.total_mass();
    let hint = if mass.finite { Some(-1.0) } else { None };
    let inner = n_alpha_inner(radial, alpha);
    Ok(RadialMeasure::Density(SupportedDensity::from_fn(
        move |y: f64| inner(y) / y,
        0.0,
        f64::INFINITY,
        hint,
    )))
}

/// int e^(-(y/v)^alpha) nu_xi(dv) as a closure: exact over atoms,
/// quadrature over the absolutely continuous parts, recursive over sums.
fn n_alpha_inner(radial: &RadialMeasure, alpha: f64) -> Arc<dyn Fn(f64) -> f64 + Send + Sync> {
    match radial {
        RadialMeasure::Atoms(atoms) => {
            let atoms = atoms.clone();
            Arc::new(move |y: f64| {
                atoms
                    .iter()
                    .map(|a| a.mass * (-(y / a.at).powf(alpha)).exp())
                    .sum()
            })
        }
        RadialMeasure::Sum(parts) => {
            let inners: Vec<_> = parts.iter().map(|p| n_alpha_inner(p, alpha)).collect();
            Arc::new(move |y: f64| inners.iter().map(|f| f(y)).sum())
        }
        other => {
            let other = other.clone();
            let (lo, hi) = match &other {
                RadialMeasure::Density(d) => (d.lo(), d.hi()),
                _ => (0.0, f64::INFINITY),
            };
            Arc::new(move |y: f64| {
                integrate_support(
                    |v: f64| (-(y / v).powf(alpha)).exp() * other.density_at(v),
                    lo,
                    hi,
                    NESTED_TOL * 0.1,
                )
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
            })
        }
    }
}

fn radial_support_end(radial: &RadialMeasure) -> f64 {
    match radial {
        RadialMeasure::Atoms(atoms) => atoms.iter().map(|a| a.at).fold(0.0, f64::max),
        RadialMeasure::Density(d) => d.hi(),
        RadialMeasure::CmRep(_) => f64::INFINITY,
        RadialMeasure::Sum(parts) => parts.iter().map(radial_support_end).fold(0.0, f64::max),
    }
}

/// Transform a generating triplet through the kernel:
/// A~ = (int f^2) A, nu~ per radial component, gamma~ = (int f) gamma plus
/// the scale correction integral.
pub fn transform_triplet(kernel: &Kernel, mu: &GeneratingTriplet) -> Result<GeneratingTriplet> {
    ensure_log_moment(kernel, mu)?;
    let dim = mu.dim();
    let gaussian: Vec<f64> = mu.gaussian().iter().map(|a| a * kernel.squared_integral()).collect();

    let levy = mu.levy().map_radial(|radial| match kernel.kind {
        KernelKind::EAlpha(a) => Ok(RadialMeasure::CmRep(radial_of_transform(radial, a)?)),
        KernelKind::Phi => phi_radial(radial),
        KernelKind::NAlpha(a) => n_alpha_radial(radial, a),
    })?;

    // gamma~ = (int f) gamma + int w(u) u cc_d(u) du per direction
    let mut gamma: Vec<f64> = mu.gamma().iter().map(|g| g * kernel.first_integral()).collect();
    let (u_lo, u_hi) = kernel.scale_support();
    for d in mu.levy().directions() {
        if d.radial.is_zero() {
            continue;
        }
        let weighted = |u: f64| -> f64 {
            let w_u = kernel.scale_density(u) * u;
            if w_u == 0.0 {
                return 0.0;
            }
            w_u * d.radial.centering_correction(u).unwrap_or(f64::NAN)
        };
        let correction = integrate_support(weighted, u_lo, u_hi, NESTED_TOL * 0.1)?.value;
        for (i, x) in d.xi.iter().enumerate() {
            gamma[i] += d.weight * x * correction;
        }
    }

    GeneratingTriplet::new(dim, gaussian, levy, gamma)
}

/// C_(kernel mu)(z) = int C_mu(u z) w(u) du: the cumulant-level route,
/// independent of the triplet materialization.
pub fn transform_cumulant(kernel: &Kernel, mu: &GeneratingTriplet, z: &[f64]) -> Result<Complex64> {
    ensure_log_moment(kernel, mu)?;
    if z.iter().all(|v| *v == 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (u_lo, u_hi) = kernel.scale_support();
    let zv = z.to_vec();
    let (value, _err) = integrate_support_complex(
        |u: f64| {
            let w = kernel.scale_density(u);
            if w == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let scaled: Vec<f64> = zv.iter().map(|v| v * u).collect();
            match mu.cumulant(&scaled) {
                Ok(c) => c * w,
                Err(_) => Complex64::new(f64::NAN, f64::NAN),
            }
        },
        u_lo,
        u_hi,
        NESTED_TOL,
    )?;
    if !value.re.is_finite() || !value.im.is_finite() {
        return Err(Error::Divergent("transformed cumulant integral".into()));
    }
    Ok(value)
}

/// Report of the composition identity Phi o E_alpha = E_alpha o Phi = N_alpha.
#[derive(Debug, Clone)]
pub struct ComposeReport {
    pub z_grid: Vec<f64>,
    pub phi_after_e: Vec<Complex64>,
    pub e_after_phi: Vec<Complex64>,
    pub n_direct: Vec<Complex64>,
    pub max_discrepancy: f64,
}

/// Evaluate both composition orders by iterated triplet transforms and the
/// direct N_alpha cumulant on a z grid; report the largest pairwise gap.
pub fn compose_check(alpha: f64, mu: &GeneratingTriplet, z_grid: &[f64]) -> Result<ComposeReport> {
    if mu.dim() != 1 {
        return Err(Error::Unsupported("composition check runs on d = 1".into()));
    }
    let e_kernel = Kernel::new(KernelKind::EAlpha(alpha))?;
    let phi_kernel = Kernel::new(KernelKind::Phi)?;
    let n_kernel = Kernel::new(KernelKind::NAlpha(alpha))?;

    let phi_after_e_triplet = transform_triplet(&phi_kernel, &transform_triplet(&e_kernel, mu)?)?;
    let e_after_phi_triplet = transform_triplet(&e_kernel, &transform_triplet(&phi_kernel, mu)?)?;

    let mut phi_after_e = Vec::with_capacity(z_grid.len());
    let mut e_after_phi = Vec::with_capacity(z_grid.len());
    let mut n_direct = Vec::with_capacity(z_grid.len());
    let mut max_discrepancy = 0.0_f64;
    for &z in z_grid {
        let a = phi_after_e_triplet.cumulant(&[z])?;
        let b = e_after_phi_triplet.cumulant(&[z])?;
        let c = transform_cumulant(&n_kernel, mu, &[z])?;
        max_discrepancy = max_discrepancy
            .max((a - b).norm())
            .max((a - c).norm())
            .max((b - c).norm());
        phi_after_e.push(a);
        e_after_phi.push(b);
        n_direct.push(c);
    }
    Ok(ComposeReport {
        z_grid: z_grid.to_vec(),
        phi_after_e,
        e_after_phi,
        n_direct,
        max_discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::{is_member_e_alpha, DEFAULT_CM_TOL};
    use crate::triplet::{LevyMeasure, MassAtom};
    use approx::assert_relative_eq;

    fn cp_dirac(r: f64, w: f64) -> GeneratingTriplet {
        GeneratingTriplet::compound_poisson_1d(LevyMeasure::one_sided(RadialMeasure::atom(r, w))).unwrap()
    }

    fn cp_exp_density() -> GeneratingTriplet {
        GeneratingTriplet::compound_poisson_1d(LevyMeasure::one_sided(
            RadialMeasure::density_expr("exp(-r)", 0.0, f64::INFINITY, Some(0.0)).unwrap(),
        ))
        .unwrap()
    }

    #[test]
    fn kernel_point_examples() {
        let e1 = Kernel::new(KernelKind::EAlpha(1.0)).unwrap();
        assert_relative_eq!(e1.evaluate((-1.0_f64).exp()), 1.0, epsilon = 1e-12);

        let n1 = Kernel::new(KernelKind::NAlpha(1.0)).unwrap();
        let t = exp_integral_e1(1.0).unwrap();
        assert_relative_eq!(n1.evaluate(t), 1.0, epsilon = 1e-9);

        let phi = Kernel::new(KernelKind::Phi).unwrap();
        assert_relative_eq!(phi.evaluate(2.0_f64.ln()), 0.5, epsilon = 1e-14);

        assert!(Kernel::new(KernelKind::EAlpha(0.0)).is_err());
        assert!(make_kernel(KernelName::EAlpha, None).is_err());
    }

    #[test]
    fn psi_and_m_are_fixed_n_kernels() {
        let psi = make_kernel(KernelName::Psi, None).unwrap();
        assert_eq!(psi.kind(), KernelKind::NAlpha(1.0));
        let m = make_kernel(KernelName::M, None).unwrap();
        assert_eq!(m.kind(), KernelKind::NAlpha(2.0));
        // m^*(t) inverts m(x) = E1(x^2)/2
        let t = exp_integral_e1(1.0).unwrap() / 2.0;
        assert_relative_eq!(m.evaluate(t), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn cached_integrals_match_quadrature() {
        for kind in [
            KernelKind::EAlpha(0.5),
            KernelKind::EAlpha(1.0),
            KernelKind::EAlpha(2.0),
            KernelKind::EAlpha(3.0),
            KernelKind::Phi,
            KernelKind::NAlpha(1.0),
            KernelKind::NAlpha(2.0),
        ] {
            let k = Kernel::new(kind).unwrap();
            let (lo, hi) = k.support();
            let sq = integrate_support(|t| k.evaluate(t).powi(2), lo, hi, 1e-11).unwrap().value;
            assert_relative_eq!(sq, k.squared_integral(), max_relative = 1e-8);
            let first = integrate_support(|t| k.evaluate(t), lo, hi, 1e-11).unwrap().value;
            assert_relative_eq!(first, k.first_integral(), max_relative = 1e-8);
        }
    }

    #[test]
    fn n_star_inverts_n_alpha_on_a_grid() {
        for alpha in [0.5, 1.0, 2.0] {
            let k = Kernel::new(KernelKind::NAlpha(alpha)).unwrap();
            let mut x = 0.1_f64;
            while x <= 5.0 {
                let t = exp_integral_e1(x.powf(alpha)).unwrap() / alpha;
                assert!(
                    (k.evaluate(t) - x).abs() <= 1e-8 * (1.0 + x),
                    "alpha {alpha}, x {x}: got {}",
                    k.evaluate(t)
                );
                x *= 1.4;
            }
        }
    }

    #[test]
    fn gaussian_factor_examples() {
        // E_2 on A=1: Gamma(2) = 1
        let k = Kernel::new(KernelKind::EAlpha(2.0)).unwrap();
        let out = transform_triplet(&k, &GeneratingTriplet::gaussian_1d(1.0)).unwrap();
        assert_relative_eq!(out.gaussian()[0], 1.0, max_relative = 1e-12);

        // E_1 on A=2: Gamma(3) * 2 = 4
        let k = Kernel::new(KernelKind::EAlpha(1.0)).unwrap();
        let out = transform_triplet(&k, &GeneratingTriplet::gaussian_1d(2.0)).unwrap();
        assert_relative_eq!(out.gaussian()[0], 4.0, max_relative = 1e-12);
    }

    #[test]
    fn transformed_atom_has_weibull_tail() {
        // E_alpha(delta_1): nu~([r, inf)) = e^(-r^alpha)
        for alpha in [0.5, 1.0, 2.0] {
            let k = Kernel::new(KernelKind::EAlpha(alpha)).unwrap();
            let out = transform_triplet(&k, &cp_dirac(1.0, 1.0)).unwrap();
            let d = &out.levy().directions()[0];
            for r in [0.25, 1.0, 2.5] {
                let tail = d.radial.tail_mass(r);
                assert!(tail.finite);
                assert_relative_eq!(
                    d.weight * tail.value,
                    (-r.powf(alpha)).exp(),
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn transform_cumulant_examples() {
        let k = Kernel::new(KernelKind::EAlpha(2.0)).unwrap();
        let mu = GeneratingTriplet::gaussian_1d(1.0);
        let c = transform_cumulant(&k, &mu, &[0.0]).unwrap();
        assert_eq!(c, Complex64::new(0.0, 0.0));
        // closed form: -Gamma(1 + 2/alpha) z^2 A / 2 at z = 1
        let c = transform_cumulant(&k, &mu, &[1.0]).unwrap();
        assert_relative_eq!(c.re, -0.5, max_relative = 1e-9);
        assert!(c.im.abs() < 1e-12);
    }

    #[test]
    fn n1_of_dirac_cp_matches_log_oracle() {
        // mu = zero-drift CP(delta_1): C_mu(v) = e^{iv} - 1, and
        // int_0^inf (e^{ivz} - 1) v^-1 e^-v dv = -log(1 - iz)
        let mu = cp_dirac(1.0, 1.0);
        let k = Kernel::new(KernelKind::NAlpha(1.0)).unwrap();
        for z in [-2.0, -1.0, 0.5, 1.0, 2.0] {
            let got = transform_cumulant(&k, &mu, &[z]).unwrap();
            let want = -Complex64::new(1.0, -z).ln();
            assert!(
                (got - want).norm() <= 1e-8,
                "z = {z}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn triplet_and_cumulant_routes_agree() {
        let k = Kernel::new(KernelKind::EAlpha(1.0)).unwrap();
        let mu = cp_dirac(1.0, 1.0);
        let out = transform_triplet(&k, &mu).unwrap();
        for z in [-2.0, -0.5, 1.0, 3.0] {
            let a = out.cumulant(&[z]).unwrap();
            let b = transform_cumulant(&k, &mu, &[z]).unwrap();
            assert!((a - b).norm() <= 1e-7, "z = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn routes_agree_on_damped_heavy_tails() {
        // polynomial body with an eventual exponential cutoff: heavy enough
        // to stress the gamma correction, still within quadrature scope
        let mu = GeneratingTriplet::jump_1d(
            LevyMeasure::one_sided(
                RadialMeasure::density_expr("r^(-2)*exp(-r/20)", 1.0, f64::INFINITY, None).unwrap(),
            ),
            0.0,
        )
        .unwrap();
        assert!(mu.levy().log_moment_finite(1));
        let phi = Kernel::new(KernelKind::Phi).unwrap();
        let out = transform_triplet(&phi, &mu).unwrap();
        for z in [-1.5, 0.5, 2.0] {
            let a = out.cumulant(&[z]).unwrap();
            let b = transform_cumulant(&phi, &mu, &[z]).unwrap();
            assert!((a - b).norm() <= 1e-6, "z = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn pure_power_tails_report_a_quadrature_diagnostic() {
        // undamped polynomial tails put the cumulant integrand in the
        // oscillatory regime we do not specialize for; the contract is a
        // non-convergence diagnostic carrying the best estimate, promptly
        let mu = GeneratingTriplet::jump_1d(
            LevyMeasure::one_sided(
                RadialMeasure::density_expr("r^(-2.5)", 1.0, f64::INFINITY, None).unwrap(),
            ),
            0.0,
        )
        .unwrap();
        let phi = Kernel::new(KernelKind::Phi).unwrap();
        let out = transform_triplet(&phi, &mu).unwrap();
        match out.cumulant(&[2.0]) {
            Ok(c) => assert!(c.re.is_finite() && c.im.is_finite()),
            Err(Error::QuadratureNonConvergence { estimate, residual, .. }) => {
                assert!(estimate.is_finite());
                assert!(residual.is_finite() && residual > 0.0);
            }
            Err(other) => panic!("unexpected error kind: {other}"),
        }
    }

    #[test]
    fn two_dimensional_transform_matches_cumulant_route() {
        let mu = GeneratingTriplet::new(
            2,
            vec![0.5, 0.1, 0.1, 0.3],
            LevyMeasure::new(vec![
                crate::triplet::Direction {
                    xi: vec![1.0, 0.0],
                    weight: 1.0,
                    radial: RadialMeasure::atom(1.0, 1.0),
                },
                crate::triplet::Direction {
                    xi: vec![0.6, 0.8],
                    weight: 0.5,
                    radial: RadialMeasure::atom(2.0, 0.5),
                },
            ])
            .unwrap(),
            vec![0.2, -0.1],
        )
        .unwrap();
        let k = Kernel::new(KernelKind::EAlpha(2.0)).unwrap();
        let out = transform_triplet(&k, &mu).unwrap();
        // Gaussian block scales componentwise by Gamma(1 + 2/alpha) = 1
        assert_relative_eq!(out.gaussian()[1], 0.1, max_relative = 1e-12);
        for z in [[0.8, -1.1], [1.5, 0.3], [-0.4, -0.9]] {
            let a = out.cumulant(&z).unwrap();
            let b = transform_cumulant(&k, &mu, &z).unwrap();
            assert!((a - b).norm() <= 1e-7, "z = {z:?}: {a} vs {b}");
        }
    }

    #[test]
    fn transforms_are_additive_over_mixed_radial_parts() {
        // a two-part radial measure (atom + density) transforms to the sum
        // of the separately transformed parts, for every kernel
        let atom = RadialMeasure::atom(1.5, 0.75);
        let dens = RadialMeasure::density_expr("exp(-r)", 0.0, f64::INFINITY, Some(0.0)).unwrap();
        let both = RadialMeasure::Sum(vec![atom.clone(), dens.clone()]);
        for kind in [KernelKind::EAlpha(1.0), KernelKind::Phi, KernelKind::NAlpha(1.0)] {
            let k = Kernel::new(kind).unwrap();
            let make = |radial: RadialMeasure| {
                let mu = GeneratingTriplet::compound_poisson_1d(LevyMeasure::one_sided(radial)).unwrap();
                transform_triplet(&k, &mu).unwrap()
            };
            let whole = make(both.clone());
            let part_a = make(atom.clone());
            let part_b = make(dens.clone());
            for y in [0.3, 1.0, 2.5] {
                let lhs = whole.levy().directions()[0].radial.density_at(y);
                let rhs = part_a.levy().directions()[0].radial.density_at(y)
                    + part_b.levy().directions()[0].radial.density_at(y);
                assert!(
                    (lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()),
                    "{kind:?} at y = {y}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn three_dimensional_triplet_round_trip() {
        let mu = GeneratingTriplet::new(
            3,
            vec![
                1.0, 0.2, 0.0, //
                0.2, 0.8, 0.1, //
                0.0, 0.1, 0.5,
            ],
            LevyMeasure::new(vec![crate::triplet::Direction {
                xi: vec![1.0 / 3.0_f64.sqrt(); 3],
                weight: 1.0,
                radial: RadialMeasure::atom(1.0, 2.0),
            }])
            .unwrap(),
            vec![0.1, 0.0, -0.2],
        )
        .unwrap();
        let k = Kernel::new(KernelKind::EAlpha(1.0)).unwrap();
        let out = transform_triplet(&k, &mu).unwrap();
        for z in [[1.0, 0.0, -1.0], [0.5, 0.5, 0.5]] {
            let a = out.cumulant(&z).unwrap();
            let b = transform_cumulant(&k, &mu, &z).unwrap();
            assert!((a - b).norm() <= 1e-7, "z = {z:?}: {a} vs {b}");
        }
    }

    #[test]
    fn n_star_far_outside_the_seed_table() {
        // huge t: x = E1^-1(alpha t) is tiny, series regime
        let k = Kernel::new(KernelKind::NAlpha(1.0)).unwrap();
        let t = 30.0;
        let x = k.evaluate(t);
        assert!(x > 0.0 && x < 1e-12, "x = {x}");
        assert_relative_eq!(exp_integral_e1(x).unwrap(), t, max_relative = 1e-10);

        // tiny t: x is large, asymptotic regime
        let t = exp_integral_e1(50.0_f64).unwrap(); // ~ 3.9e-24
        assert_relative_eq!(k.evaluate(t), 50.0, max_relative = 1e-9);
    }

    #[test]
    fn log_moment_domain_gate() {
        let heavy = GeneratingTriplet::jump_1d(
            LevyMeasure::one_sided(
                RadialMeasure::density_expr("1/(r*log(r)^2)", std::f64::consts::E, f64::INFINITY, None).unwrap(),
            ),
            0.0,
        )
        .unwrap();
        let phi = Kernel::new(KernelKind::Phi).unwrap();
        match transform_triplet(&phi, &heavy) {
            Err(Error::DomainViolation(msg)) => assert!(msg.contains("I_log")),
            other => panic!("expected a domain violation, got {other:?}"),
        }
        // E_alpha has full domain
        let e = Kernel::new(KernelKind::EAlpha(1.0)).unwrap();
        assert!(transform_triplet(&e, &heavy).is_ok());
    }

    #[test]
    fn compose_identity_examples() {
        // delta_0: everything is zero
        let r = compose_check(1.0, &GeneratingTriplet::dirac_zero(1), &[-1.0, 0.5, 2.0]).unwrap();
        assert!(r.max_discrepancy <= 1e-12, "{}", r.max_discrepancy);

        // Gaussian A = 1, alpha = 2: variance Gamma(1+2/alpha)/2 = Gamma(2)/2 both ways
        let r = compose_check(2.0, &GeneratingTriplet::gaussian_1d(1.0), &[-1.0, 1.0]).unwrap();
        assert!(r.max_discrepancy <= 1e-8, "{}", r.max_discrepancy);

        // CP(delta_1), alpha = 1, z in {+-1, +-2}
        let r = compose_check(1.0, &cp_dirac(1.0, 1.0), &[-2.0, -1.0, 1.0, 2.0]).unwrap();
        assert!(r.max_discrepancy <= 1e-7, "{}", r.max_discrepancy);
    }

    #[test]
    fn symmetry_preserved_both_ways() {
        let sym_density = || {
            GeneratingTriplet::jump_1d(
                LevyMeasure::symmetric_1d(RadialMeasure::density_expr("exp(-r)", 0.0, f64::INFINITY, Some(0.0)).unwrap()),
                0.0,
            )
            .unwrap()
        };
        let sym_atoms = || {
            GeneratingTriplet::jump_1d(
                LevyMeasure::symmetric_1d(RadialMeasure::Atoms(vec![
                    MassAtom { at: 0.5, mass: 1.0 },
                    MassAtom { at: 2.0, mass: 0.25 },
                ])),
                0.0,
            )
            .unwrap()
        };
        let asym_atom = || cp_dirac(1.0, 1.0);
        let asym_shift = || {
            GeneratingTriplet::jump_1d(
                LevyMeasure::symmetric_1d(RadialMeasure::atom(1.0, 1.0)),
                0.7,
            )
            .unwrap()
        };
        for alpha in [0.5, 1.0, 2.0] {
            let k = Kernel::new(KernelKind::EAlpha(alpha)).unwrap();
            for mu in [sym_density(), sym_atoms()] {
                assert!(mu.is_symmetric(1e-9));
                let out = transform_triplet(&k, &mu).unwrap();
                assert!(out.is_symmetric(1e-9), "alpha {alpha}: symmetric input maps to symmetric");
            }
            for mu in [asym_atom(), asym_shift()] {
                assert!(!mu.is_symmetric(1e-9));
                let out = transform_triplet(&k, &mu).unwrap();
                assert!(!out.is_symmetric(1e-9), "alpha {alpha}: asymmetric input stays asymmetric");
            }
        }
    }

    #[test]
    fn convolution_morphism() {
        let k = Kernel::new(KernelKind::EAlpha(1.0)).unwrap();
        let a = cp_dirac(1.0, 1.0);
        let b = GeneratingTriplet::gaussian_1d(0.5);
        let lhs = transform_triplet(&k, &a.convolve(&b).unwrap()).unwrap();
        let rhs = transform_triplet(&k, &a)
            .unwrap()
            .convolve(&transform_triplet(&k, &b).unwrap())
            .unwrap();
        for z in [-3.0, -1.0, 0.5, 2.0] {
            let l = lhs.cumulant(&[z]).unwrap();
            let r = rhs.cumulant(&[z]).unwrap();
            assert!((l - r).norm() <= 1e-9, "z = {z}: {l} vs {r}");
        }
    }

    #[test]
    fn log_moment_preserved_by_e_alpha() {
        // finite log-moments stay finite
        let mu = cp_exp_density();
        let k = Kernel::new(KernelKind::EAlpha(1.0)).unwrap();
        let out = transform_triplet(&k, &mu).unwrap();
        for m in [1, 2] {
            assert!(mu.levy().log_moment_finite(m));
            assert!(out.levy().log_moment_finite(m), "m = {m}");
        }

        // infinite log-moment stays infinite
        let heavy = GeneratingTriplet::jump_1d(
            LevyMeasure::one_sided(
                RadialMeasure::density_expr("1/(r*log(r)^2)", std::f64::consts::E, f64::INFINITY, None).unwrap(),
            ),
            0.0,
        )
        .unwrap();
        let out = transform_triplet(&k, &heavy).unwrap();
        assert!(!heavy.levy().log_moment_finite(1));
        assert!(!out.levy().log_moment_finite(1));
    }

    #[test]
    fn range_property_every_output_is_in_e_alpha() {
        for alpha in [0.5, 1.0, 2.0] {
            let k = Kernel::new(KernelKind::EAlpha(alpha)).unwrap();
            for mu in [cp_dirac(1.0, 1.0), cp_dirac(2.0, 0.5), cp_exp_density()] {
                let out = transform_triplet(&k, &mu).unwrap();
                let v = is_member_e_alpha(out.levy(), alpha, DEFAULT_CM_TOL).unwrap();
                assert!(v.passed(), "alpha {alpha}: {v:?}");
            }
        }
    }

    #[test]
    fn phi_image_of_selfdecomposable_is_n_alpha_image() {
        // mu_L = Phi(mu_0) is selfdecomposable with k(r) = e^-r when mu_0 is
        // the CP law with density e^-r; then E_alpha(mu_L) = N_alpha(mu_0),
        // and the output is in E_alpha.
        let alpha = 1.0;
        let mu0 = cp_exp_density();
        let phi = Kernel::new(KernelKind::Phi).unwrap();
        let mu_l = transform_triplet(&phi, &mu0).unwrap();
        // radial density of mu_L is e^-y / y: check k(r) = r * density = e^-r
        let d = &mu_l.levy().directions()[0];
        for r in [0.3, 1.0, 2.0] {
            assert_relative_eq!(r * d.radial.density_at(r), (-r).exp(), max_relative = 1e-8);
        }

        let e = Kernel::new(KernelKind::EAlpha(alpha)).unwrap();
        let lhs = transform_triplet(&e, &mu_l).unwrap();
        let n = Kernel::new(KernelKind::NAlpha(alpha)).unwrap();
        for z in [-2.0, -0.5, 1.0, 3.0] {
            let a = lhs.cumulant(&[z]).unwrap();
            let b = transform_cumulant(&n, &mu0, &[z]).unwrap();
            assert!((a - b).norm() <= 1e-7, "z = {z}: {a} vs {b}");
        }
        let v = is_member_e_alpha(lhs.levy(), alpha, DEFAULT_CM_TOL).unwrap();
        assert!(v.passed(), "{v:?}");
    }
}
