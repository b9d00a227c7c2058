//! Numerical membership tests for the classes B, L, M, T and E_alpha, the
//! radial-representation constructions behind the range characterization, and the
//! embedding E_alpha into E_beta.
//!
//! Complete monotonicity is semi-decidable from samples. The project-wide
//! standard is the necessary-condition test (-1)^n Delta_h^n g >= 0 for
//! n <= 8 on a 64-point geometric grid over [1e-3, 1e3], with tolerance
//! 1e-9 relative to the local function magnitude: strict enough to catch
//! the textbook non-CM witnesses, loose enough to absorb round-off on
//! decaying exponentials.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::qrep::{validate_q, QMode};
use crate::triplet::{CmRep, LevyMeasure, MassAtom, MixingMeasure, RadialMeasure, SupportedDensity};

pub const DEFAULT_MAX_ORDER: usize = 8;
pub const DEFAULT_CM_TOL: f64 = 1e-9;
/// Fraction of the grid point used as the finite-difference step.
const STENCIL_FRACTION: f64 = 0.15;

/// Geometric grid with `n` points spanning [lo, hi].
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l, h) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l + (h - l) * i as f64 / (n as f64 - 1.0)).exp())
        .collect()
}

pub fn default_grid() -> Vec<f64> {
    geometric_grid(1e-3, 1e3, 64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub point: f64,
    pub order: usize,
}

/// Outcome of a complete-monotonicity (or monotonicity) test.
#[derive(Debug, Clone)]
pub struct CmVerdict {
    pub passed: bool,
    pub max_violation: f64,
    pub order_checked: usize,
    /// Present iff the test failed: grid point and difference order.
    pub witness: Option<Witness>,
    /// Set when the verdict came from structure rather than sampling
    /// (atomic part present, matching CM representation, zero measure).
    pub note: Option<String>,
}

impl CmVerdict {
    fn pass() -> Self {
        CmVerdict {
            passed: true,
            max_violation: 0.0,
            order_checked: 0,
            witness: None,
            note: None,
        }
    }

    fn structural_pass(note: &str) -> Self {
        CmVerdict {
            note: Some(note.to_string()),
            ..CmVerdict::pass()
        }
    }

    fn structural_fail(note: &str, witness: Witness) -> Self {
        CmVerdict {
            passed: false,
            max_violation: f64::INFINITY,
            order_checked: 0,
            witness: Some(witness),
            note: Some(note.to_string()),
        }
    }
}

/// Finite-difference test for complete monotonicity of `g` on a grid:
/// (-1)^n Delta_h^n g(r) >= -tol * scale for all n <= max_order, with
/// h = STENCIL_FRACTION * r and scale the local magnitude.
///
/// Positivity is part of the test: a CM function is positive or identically
/// zero, so a zero value followed by a positive one is a violation.
pub fn cm_test<G: Fn(f64) -> f64>(g: G, grid: &[f64], max_order: usize, tol: f64) -> Result<CmVerdict> {
    if grid.is_empty() {
        return Err(Error::invalid("cm_test", "empty grid"));
    }
    let values: Vec<f64> = grid.iter().map(|&r| g(r)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        let bad = grid[values.iter().position(|v| !v.is_finite()).expect("found")];
        return Err(Error::invalid("cm_test", format!("non-finite value at r = {bad}")));
    }
    if values.iter().all(|&v| v == 0.0) {
        return Ok(CmVerdict::structural_pass("identically zero on the grid"));
    }
    let mut max_violation = 0.0_f64;
    let mut witness = None;

    // positivity / zero-region structure
    for (i, &v) in values.iter().enumerate() {
        if v < 0.0 {
            let violation = -v / values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            if violation > max_violation {
                max_violation = violation;
                witness = Some(Witness { point: grid[i], order: 0 });
            }
        }
        if v == 0.0 && values[i + 1..].iter().any(|&w| w > 0.0) {
            return Ok(CmVerdict {
                passed: false,
                max_violation: f64::INFINITY,
                order_checked: max_order,
                witness: Some(Witness { point: grid[i], order: 0 }),
                note: Some("vanishes inside the support (CM functions are positive or identically zero)".into()),
            });
        }
    }

    for (&r, &v0) in grid.iter().zip(&values) {
        let h = STENCIL_FRACTION * r;
        let mut stencil = Vec::with_capacity(max_order + 1);
        stencil.push(v0);
        for k in 1..=max_order {
            let v = g(r + k as f64 * h);
            if !v.is_finite() {
                return Err(Error::invalid("cm_test", format!("non-finite value at r = {}", r + k as f64 * h)));
            }
            stencil.push(v);
        }
        let scale = stencil.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
        // iterated forward differences: after n rounds, diff[0] = Delta^n g(r)
        let mut diff = stencil;
        for n in 1..=max_order {
            for i in 0..(diff.len() - 1) {
                diff[i] = diff[i + 1] - diff[i];
            }
            diff.pop();
            let signed = if n % 2 == 0 { diff[0] } else { -diff[0] };
            if signed < 0.0 {
                let violation = -signed / scale;
                if violation > max_violation {
                    max_violation = violation;
                    witness = Some(Witness { point: r, order: n });
                }
            }
        }
    }

    let passed = max_violation <= tol;
    Ok(CmVerdict {
        passed,
        max_violation,
        order_checked: max_order,
        witness: if passed { None } else { witness },
        note: None,
    })
}

/// Class tags for the membership checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassTag {
    /// Goldie-Steutel-Bondesson: radial density completely monotone.
    B,
    /// Selfdecomposable: r^-1 k(r) with k nonincreasing.
    L,
    /// r^-1 g(r^2) with g completely monotone.
    M,
    /// Thorin: r^-1 g(r) with g completely monotone.
    T,
    /// r^(alpha-1) g(r^alpha) with g completely monotone.
    EAlpha,
}

#[derive(Debug, Clone)]
pub struct DirectionVerdict {
    pub xi: Vec<f64>,
    pub verdict: CmVerdict,
}

#[derive(Debug, Clone)]
pub struct ClassVerdict {
    pub class: ClassTag,
    pub alpha: Option<f64>,
    pub per_direction: Vec<DirectionVerdict>,
}

impl ClassVerdict {
    pub fn passed(&self) -> bool {
        self.per_direction.iter().all(|d| d.verdict.passed)
    }
}

fn direction_verdict(radial: &RadialMeasure, alpha: f64, tol: f64) -> Result<CmVerdict> {
    if radial.is_zero() {
        return Ok(CmVerdict::structural_pass("zero radial measure"));
    }
    if radial.has_atoms() {
        let point = match radial {
            RadialMeasure::Atoms(a) => a.first().map(|x| x.at).unwrap_or(0.0),
            _ => 0.0,
        };
        return Ok(CmVerdict::structural_fail(
            "not absolutely continuous (atomic part present)",
            Witness { point, order: 0 },
        ));
    }
    if let RadialMeasure::CmRep(rep) = radial {
        if (rep.alpha - alpha).abs() <= 1e-12 {
            let q = validate_q(&rep.mixing, alpha, QMode::Levy)?;
            return Ok(if q.ok {
                CmVerdict::structural_pass("CM representation with matching exponent")
            } else {
                CmVerdict::structural_fail(
                    "CM representation whose mixing measure fails the Levy conditions",
                    Witness { point: 0.0, order: 0 },
                )
            });
        }
    }
    // density route: recover g(y) = density(y^(1/alpha)) * y^((1-alpha)/alpha)
    let g = |y: f64| radial.density_at(y.powf(1.0 / alpha)) * y.powf((1.0 - alpha) / alpha);
    cm_test(g, &default_grid(), DEFAULT_MAX_ORDER, tol)
}

/// Per-direction test for membership of nu in E_alpha: radial densities of
/// the form r^(alpha-1) g(r^alpha) with g completely monotone.
pub fn is_member_e_alpha(nu: &LevyMeasure, alpha: f64, tol: f64) -> Result<ClassVerdict> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("need alpha > 0, got {alpha}")));
    }
    let per_direction = nu
        .directions()
        .iter()
        .map(|d| {
            Ok(DirectionVerdict {
                xi: d.xi.clone(),
                verdict: direction_verdict(&d.radial, alpha, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassVerdict {
        class: ClassTag::EAlpha,
        alpha: Some(alpha),
        per_direction,
    })
}

/// Membership in one of the four named classes.
pub fn is_member(class: ClassTag, nu: &LevyMeasure, tol: f64) -> Result<ClassVerdict> {
    match class {
        ClassTag::B => {
            let mut v = is_member_e_alpha(nu, 1.0, tol)?;
            v.class = ClassTag::B;
            v.alpha = None;
            Ok(v)
        }
        ClassTag::EAlpha => Err(Error::invalid("class", "E_alpha needs an explicit alpha; call is_member_e_alpha")),
        ClassTag::L => {
            let per_direction = nu
                .directions()
                .iter()
                .map(|d| {
                    let verdict = if d.radial.is_zero() {
                        CmVerdict::structural_pass("zero radial measure")
                    } else if d.radial.has_atoms() {
                        CmVerdict::structural_fail(
                            "not absolutely continuous (atomic part present)",
                            Witness { point: 0.0, order: 0 },
                        )
                    } else {
                        let radial = &d.radial;
                        nonincreasing_test(|r| r * radial.density_at(r), &default_grid(), tol)
                    };
                    Ok(DirectionVerdict {
                        xi: d.xi.clone(),
                        verdict,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ClassVerdict {
                class: ClassTag::L,
                alpha: None,
                per_direction,
            })
        }
        ClassTag::M | ClassTag::T => {
            let per_direction = nu
                .directions()
                .iter()
                .map(|d| {
                    let verdict = if d.radial.is_zero() {
                        CmVerdict::structural_pass("zero radial measure")
                    } else if d.radial.has_atoms() {
                        CmVerdict::structural_fail(
                            "not absolutely continuous (atomic part present)",
                            Witness { point: 0.0, order: 0 },
                        )
                    } else {
                        let radial = &d.radial;
                        let g: Box<dyn Fn(f64) -> f64> = match class {
                            // nu = r^-1 g(r^2): g(y) = sqrt(y) * density(sqrt(y))
                            ClassTag::M => Box::new(move |y: f64| y.sqrt() * radial.density_at(y.sqrt())),
                            // nu = r^-1 g(r): g(r) = r * density(r)
                            _ => Box::new(move |r: f64| r * radial.density_at(r)),
                        };
                        cm_test(g, &default_grid(), DEFAULT_MAX_ORDER, tol)?
                    };
                    Ok(DirectionVerdict {
                        xi: d.xi.clone(),
                        verdict,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ClassVerdict {
                class,
                alpha: None,
                per_direction,
            })
        }
    }
}

/// Pairwise nonincreasing check with the same tolerance scheme as cm_test.
fn nonincreasing_test<G: Fn(f64) -> f64>(k: G, grid: &[f64], tol: f64) -> CmVerdict {
    let values: Vec<f64> = grid.iter().map(|&r| k(r)).collect();
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut max_violation = 0.0_f64;
    let mut witness = None;
    for i in 0..values.len() - 1 {
        let rise = values[i + 1] - values[i];
        if rise > max_violation * scale {
            max_violation = rise / scale;
            witness = Some(Witness {
                point: grid[i],
                order: 1,
            });
        }
    }
    let passed = max_violation <= tol;
    CmVerdict {
        passed,
        max_violation,
        order_checked: 1,
        witness: if passed { None } else { witness },
        note: None,
    }
}

/// The mixing measure of the transformed radial part: for nu_xi mapped by
/// the E_alpha scale mixture, Q~(B) = alpha int 1_B(x^-alpha) x^-alpha nu_xi(dx).
/// Atoms map exactly; densities map to the substituted density
/// q(t) = rho(t^(-1/alpha)) t^(-1/alpha).
pub fn radial_of_transform(nu_xi: &RadialMeasure, alpha: f64) -> Result<CmRep> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("need alpha > 0, got {alpha}")));
    }
    let mixing = transform_mixing(nu_xi, alpha)?;
    CmRep::new(alpha, mixing)
}

fn transform_mixing(nu_xi: &RadialMeasure, alpha: f64) -> Result<MixingMeasure> {
    match nu_xi {
        RadialMeasure::Atoms(atoms) => {
            let q_atoms = atoms
                .iter()
                .map(|a| MassAtom {
                    at: a.at.powf(-alpha),
                    mass: alpha * a.at.powf(-alpha) * a.mass,
                })
                .collect();
            MixingMeasure::new(q_atoms, None)
        }
        RadialMeasure::Density(d) => {
            let dd = d.clone();
            let a = alpha;
            // support (x_lo, x_hi) maps to (x_hi^-alpha, x_lo^-alpha)
            let lo = if d.hi().is_finite() { d.hi().powf(-alpha) } else { 0.0 };
            let hi = if d.lo() > 0.0 { d.lo().powf(-alpha) } else { f64::INFINITY };
            Ok(MixingMeasure::new(
                vec![],
                Some(SupportedDensity::from_fn(
                    move |t: f64| {
                        let x = t.powf(-1.0 / a);
                        dd.at(x) * x
                    },
                    lo,
                    hi,
                    None,
                )),
            )?)
        }
        RadialMeasure::CmRep(rep) => {
            let rep = rep.clone();
            let a = alpha;
            Ok(MixingMeasure::new(
                vec![],
                Some(SupportedDensity::from_fn(
                    move |t: f64| {
                        let x = t.powf(-1.0 / a);
                        rep.density_at(x) * x
                    },
                    0.0,
                    f64::INFINITY,
                    None,
                )),
            )?)
        }
        RadialMeasure::Sum(parts) => {
            let mut atoms = Vec::new();
            let mut densities: Vec<SupportedDensity> = Vec::new();
            for p in parts {
                let m = transform_mixing(p, alpha)?;
                atoms.extend_from_slice(m.atoms());
                if let Some(d) = m.density() {
                    densities.push(d.clone());
                }
            }
            let density = merge_densities(densities);
            MixingMeasure::new(atoms, density)
        }
    }
}

fn merge_densities(mut parts: Vec<SupportedDensity>) -> Option<SupportedDensity> {
    match parts.len() {
        0 => None,
        1 => parts.pop(),
        _ => {
            let lo = parts.iter().map(|d| d.lo()).fold(f64::INFINITY, f64::min);
            let hi = parts.iter().map(|d| d.hi()).fold(0.0_f64, f64::max);
            let parts = Arc::new(parts);
            Some(SupportedDensity::from_fn(
                move |t: f64| parts.iter().map(|d| d.at(t)).sum(),
                lo,
                hi,
                None,
            ))
        }
    }
}

/// Inverse of `radial_of_transform`: the radial measure whose E_alpha image
/// has mixing measure Q~. Exact atoms, density part mapped pointwise.
pub fn preimage_radial(qtilde: &MixingMeasure, alpha: f64) -> Result<RadialMeasure> {
    let verdict = validate_q(qtilde, alpha, QMode::Levy)?;
    if !verdict.ok {
        return Err(Error::DomainViolation(format!(
            "mixing measure violates the preimage conditions: near-0 integral {} ({}), tail integral {} ({})",
            verdict.near_zero.value,
            if verdict.near_zero.finite { "finite" } else { "divergent" },
            verdict.tail.value,
            if verdict.tail.finite { "finite" } else { "divergent" },
        )));
    }
    if qtilde.is_zero() {
        return Ok(RadialMeasure::zero());
    }
    let atoms: Vec<MassAtom> = qtilde
        .atoms()
        .iter()
        .map(|a| MassAtom {
            at: a.at.powf(-1.0 / alpha),
            mass: a.mass / (alpha * a.at),
        })
        .collect();
    let density = qtilde.density().map(|d| {
        let dd = d.clone();
        let a = alpha;
        let lo = if d.hi().is_finite() { d.hi().powf(-1.0 / a) } else { 0.0 };
        let hi = if d.lo() > 0.0 { d.lo().powf(-1.0 / a) } else { f64::INFINITY };
        // nu density y^-1 rho_Q(y^-alpha)
        SupportedDensity::from_fn(move |y: f64| dd.at(y.powf(-a)) / y, lo, hi, None)
    });
    Ok(match (atoms.is_empty(), density) {
        (false, None) => RadialMeasure::Atoms(atoms),
        (true, Some(d)) => RadialMeasure::Density(d),
        (false, Some(d)) => RadialMeasure::Sum(vec![RadialMeasure::Atoms(atoms), RadialMeasure::Density(d)]),
        (true, None) => RadialMeasure::zero(),
    })
}

/// The E_alpha -> E_beta embedding: h(x) = g(x^(alpha/beta)) / x^((beta-alpha)/beta)
/// is completely monotone and represents the same radial density at
/// exponent beta. The mixing measure of h has no finite closed form (a
/// one-sided-stable subordination), so the embedded representation carries
/// h itself, certified by cm_test.
pub struct EmbeddedCm {
    pub beta: f64,
    h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub verdict: CmVerdict,
}

impl EmbeddedCm {
    pub fn h_at(&self, x: f64) -> f64 {
        (self.h)(x)
    }

    /// Radial density r^(beta-1) h(r^beta).
    pub fn density_at(&self, r: f64) -> f64 {
        r.powf(self.beta - 1.0) * (self.h)(r.powf(self.beta))
    }

    /// Density-backed radial measure for downstream class checks.
    pub fn to_radial(&self, near_zero_hint: Option<f64>) -> RadialMeasure {
        let h = self.h.clone();
        let beta = self.beta;
        RadialMeasure::density_fn(
            move |r: f64| r.powf(beta - 1.0) * h(r.powf(beta)),
            0.0,
            f64::INFINITY,
            near_zero_hint,
        )
    }
}

pub fn embed_e_alpha_in_e_beta(rep: &CmRep, beta: f64) -> Result<EmbeddedCm> {
    let alpha = rep.alpha;
    if !(beta > alpha) {
        return Err(Error::invalid(
            "embedding exponent",
            format!("need beta > alpha, got alpha = {alpha}, beta = {beta}"),
        ));
    }
    let inner = rep.clone();
    let ratio = alpha / beta;
    let drop = (beta - alpha) / beta;
    let h: Arc<dyn Fn(f64) -> f64 + Send + Sync> =
        Arc::new(move |x: f64| inner.g(x.powf(ratio)) / x.powf(drop));
    let verdict = cm_test(|x| h(x), &default_grid(), DEFAULT_MAX_ORDER, DEFAULT_CM_TOL)?;
    Ok(EmbeddedCm {
        beta,
        h,
        verdict,
    })
}
