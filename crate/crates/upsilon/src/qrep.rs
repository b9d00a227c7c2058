//! Mixing measures Q on (0, inf) and their correspondence with monotone
//! integrands h: validation, F(x) = int_(0,x] t^-1 Q(dt) and its
//! left-continuous inverse, the construction h_Q = (F^<-)^(-1/alpha), the
//! recovery of Q from step integrands, tail identities, Dom classification
//! against the compound Poisson integrators, and the alternating
//! interleaving of two nonnegative integrands into one signed one.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numerics::{
    gamma_fn, integrate_finite, integrate_support, scan_tail, IntegralTable, PartialIntegral,
    NESTED_TOL,
};
use crate::triplet::{MassAtom, MixingMeasure};

/// Left-continuous step function h on (0, inf): `value` on the interval
/// (previous break, `until`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub until: f64,
    pub value: f64,
}

#[derive(Clone)]
pub enum TailFn {
    Expr(Expr),
    Closure(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

#[derive(Clone)]
pub struct Tail {
    f: TailFn,
    from: f64,
}

impl Tail {
    pub fn expr(src: &str, from: f64) -> Result<Tail> {
        Ok(Tail {
            f: TailFn::Expr(Expr::parse(src)?),
            from,
        })
    }

    pub fn closure<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, from: f64) -> Tail {
        Tail {
            f: TailFn::Closure(Arc::new(f)),
            from,
        }
    }

    pub fn from(&self) -> f64 {
        self.from
    }

    pub fn at(&self, t: f64) -> f64 {
        if t <= self.from {
            return 0.0;
        }
        match &self.f {
            TailFn::Expr(e) => e.eval(t),
            TailFn::Closure(f) => f(t),
        }
    }

    pub fn as_expr(&self) -> Option<&Expr> {
        match &self.f {
            TailFn::Expr(e) => Some(e),
            TailFn::Closure(_) => None,
        }
    }
}

impl fmt::Debug for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.f {
            TailFn::Expr(e) => write!(f, "Tail[{} from {}]", e, self.from),
            TailFn::Closure(_) => write!(f, "Tail[closure from {}]", self.from),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signature {
    Nonnegative,
    Signed,
}

#[derive(Debug, Clone)]
enum Body {
    Steps { steps: Vec<Step>, tail: Option<Tail> },
    /// The alternating four-branch layout of `interleave`; both branches are
    /// nonnegative step integrands over their own time axes.
    Interleaved { plus: Box<Integrand>, minus: Box<Integrand> },
}

/// Function h on (0, inf) to be integrated against compound Poisson paths:
/// finitely many left-closed steps, an optional decaying tail, or the signed
/// interleaving of two such integrands.
#[derive(Debug, Clone)]
pub struct Integrand {
    body: Body,
    signature: Signature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

impl Integrand {
    pub fn from_steps(steps: Vec<Step>) -> Result<Integrand> {
        Self::from_steps_with_tail(steps, None)
    }

    pub fn from_steps_with_tail(steps: Vec<Step>, tail: Option<Tail>) -> Result<Integrand> {
        if steps.windows(2).any(|w| w[0].until >= w[1].until) {
            return Err(Error::invalid("integrand", "step breaks must be strictly increasing"));
        }
        if steps.iter().any(|s| !(s.until > 0.0) || !s.value.is_finite()) {
            return Err(Error::invalid("integrand", "breaks must be positive, values finite"));
        }
        if let (Some(t), Some(last)) = (&tail, steps.last()) {
            if t.from < last.until {
                return Err(Error::invalid("integrand", "tail must start at or after the last break"));
            }
        }
        let signature = if steps.iter().all(|s| s.value >= 0.0) {
            Signature::Nonnegative
        } else {
            Signature::Signed
        };
        Ok(Integrand {
            body: Body::Steps { steps, tail },
            signature,
        })
    }

    /// h = value on (0, until], 0 after.
    pub fn indicator(value: f64, until: f64) -> Integrand {
        Integrand::from_steps(vec![Step { until, value }]).expect("single step")
    }

    pub fn zero() -> Integrand {
        Integrand {
            body: Body::Steps { steps: vec![], tail: None },
            signature: Signature::Nonnegative,
        }
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    pub fn steps(&self) -> Option<&[Step]> {
        match &self.body {
            Body::Steps { steps, .. } => Some(steps),
            Body::Interleaved { .. } => None,
        }
    }

    pub fn tail(&self) -> Option<&Tail> {
        match &self.body {
            Body::Steps { tail, .. } => tail.as_ref(),
            Body::Interleaved { .. } => None,
        }
    }

    pub fn interleaved_parts(&self) -> Option<(&Integrand, &Integrand)> {
        match &self.body {
            Body::Interleaved { plus, minus } => Some((plus, minus)),
            Body::Steps { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.body {
            Body::Steps { steps, tail } => steps.iter().all(|s| s.value == 0.0) && tail.is_none(),
            Body::Interleaved { plus, minus } => plus.is_zero() && minus.is_zero(),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.body {
            Body::Steps { steps, tail } => {
                let i = steps.partition_point(|s| s.until < t);
                if i < steps.len() {
                    steps[i].value
                } else if let Some(tl) = tail {
                    tl.at(t)
                } else {
                    0.0
                }
            }
            Body::Interleaved { plus, minus } => {
                if t > 2.0 {
                    // (2n, 2n+1] -> h1(t - n); (2n+1, 2n+2] -> -h_-1(t - n - 1)
                    let n = ((t / 2.0).ceil() - 1.0).max(1.0);
                    let r = t - 2.0 * n;
                    if r <= 1.0 {
                        plus.eval(t - n)
                    } else {
                        -minus.eval(t - n - 1.0)
                    }
                } else {
                    // (2^-k, 2^-k + 2^-k-1] -> h1(t - 2^-k-1);
                    // (2^-k + 2^-k-1, 2^-k+1] -> -h_-1(t - 2^-k)
                    let mut k = (-t.log2()).floor() as i32;
                    let mut lo = (2.0_f64).powi(-k);
                    // align so that lo < t <= 2 lo despite rounding
                    while t <= lo {
                        k += 1;
                        lo = (2.0_f64).powi(-k);
                    }
                    while t > 2.0 * lo {
                        k -= 1;
                        lo = (2.0_f64).powi(-k);
                    }
                    let mid = lo + 0.5 * lo;
                    if t <= mid {
                        plus.eval(t - 0.5 * lo)
                    } else {
                        -minus.eval(t - lo)
                    }
                }
            }
        }
    }

    /// Last time before which the integrand can be nonzero (inf when a tail
    /// is attached).
    pub fn support_end(&self) -> f64 {
        match &self.body {
            Body::Steps { steps, tail } => {
                if tail.is_some() {
                    f64::INFINITY
                } else {
                    steps
                        .iter()
                        .rev()
                        .find(|s| s.value != 0.0)
                        .map(|s| s.until)
                        .unwrap_or(0.0)
                }
            }
            Body::Interleaved { plus, minus } => {
                let e = plus.support_end().max(minus.support_end());
                if e.is_finite() {
                    2.0 * (e.ceil() + 1.0) + 2.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Bound on |h| near 0; finite for step bodies and interleaves of them.
    pub fn sup_near_zero(&self) -> f64 {
        match &self.body {
            Body::Steps { steps, tail } => {
                let s = steps.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
                if steps.is_empty() {
                    if tail.is_some() {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    s
                }
            }
            Body::Interleaved { plus, minus } => plus.sup_near_zero().max(minus.sup_near_zero()),
        }
    }

    /// int phi(h_side(s)) ds over (0, inf), with phi(0) = 0 understood.
    /// For the plus side this integrates phi over {s : h(s) > 0} of the
    /// positive values; rearrangement invariance reduces interleaves to
    /// their branches.
    pub fn phi_integral(&self, side: Side, phi: &dyn Fn(f64) -> f64) -> PartialIntegral {
        self.phi_integral_over(side, phi, 0.0, f64::INFINITY)
    }

    /// Same, restricted to the time window (a, b).
    pub fn phi_integral_over(&self, side: Side, phi: &dyn Fn(f64) -> f64, a: f64, b: f64) -> PartialIntegral {
        match &self.body {
            Body::Steps { steps, tail } => {
                let mut acc = 0.0_f64;
                let mut prev = 0.0_f64;
                for s in steps {
                    let lo = prev.max(a);
                    let hi = s.until.min(b);
                    prev = s.until;
                    if hi <= lo {
                        continue;
                    }
                    let v = side_value(s.value, side);
                    if v > 0.0 {
                        acc += (hi - lo) * phi(v);
                    }
                }
                let mut out = PartialIntegral::finite(acc);
                if let Some(tl) = tail {
                    let lo = tl.from.max(a);
                    if b > lo {
                        let f = |s: f64| {
                            let v = side_value(tl.at(s), side);
                            if v > 0.0 {
                                phi(v)
                            } else {
                                0.0
                            }
                        };
                        let part = if b.is_finite() {
                            match integrate_support(f, lo, b, NESTED_TOL) {
                                Ok(r) => PartialIntegral::finite(r.value),
                                Err(Error::QuadratureNonConvergence { estimate, .. }) => {
                                    PartialIntegral::finite(estimate)
                                }
                                Err(_) => PartialIntegral::divergent(0.0),
                            }
                        } else {
                            scan_tail(f, lo.max(1e-12), NESTED_TOL)
                        };
                        out.value += part.value;
                        out.finite &= part.finite;
                    }
                }
                out
            }
            Body::Interleaved { plus, minus } => {
                if a == 0.0 && b.is_infinite() {
                    // time rearrangement leaves these integrals invariant
                    let branch = match side {
                        Side::Plus => plus,
                        Side::Minus => minus,
                    };
                    branch.phi_integral(Side::Plus, phi)
                } else {
                    // restricted windows are only needed for the residual
                    // bounds in the sampler; map window ends conservatively
                    let branch = match side {
                        Side::Plus => plus,
                        Side::Minus => minus,
                    };
                    let half_a = (a / 2.0 - 1.0).max(0.0);
                    branch.phi_integral_over(Side::Plus, phi, half_a, f64::INFINITY)
                }
            }
        }
    }

    /// |h| as an integrand (step bodies only; interleaves stay structural).
    pub fn abs(&self) -> Integrand {
        match &self.body {
            Body::Steps { steps, tail } => {
                let steps = steps
                    .iter()
                    .map(|s| Step {
                        until: s.until,
                        value: s.value.abs(),
                    })
                    .collect();
                let tail = tail.as_ref().map(|t| {
                    let from = t.from;
                    let inner = t.clone();
                    Tail::closure(move |s| inner.at(s).abs(), from)
                });
                Integrand {
                    body: Body::Steps { steps, tail },
                    signature: Signature::Nonnegative,
                }
            }
            Body::Interleaved { plus, minus } => Integrand {
                body: Body::Interleaved {
                    plus: plus.clone(),
                    minus: minus.clone(),
                },
                signature: Signature::Nonnegative,
            },
        }
    }
}

fn side_value(v: f64, side: Side) -> f64 {
    match side {
        Side::Plus => v.max(0.0),
        Side::Minus => (-v).max(0.0),
    }
}

/// Number of breakpoints used when discretizing a callable into steps.
pub const DISCRETIZATION_BREAKS: usize = 1 << 12;

/// Validation mode for mixing measures: the conditions for the radial
/// measure to be a Levy measure, or for it to have bounded variation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QMode {
    Levy,
    BoundedVariation,
}

#[derive(Debug, Clone, Copy)]
pub struct QVerdict {
    pub ok: bool,
    /// Structurally zero for every representable measure; reported so the
    /// three defining integrals are all visible.
    pub atom_at_zero: f64,
    /// int_(0,1] t^-1 Q(dt).
    pub near_zero: PartialIntegral,
    /// int_(1,inf) t^(-1-2/alpha) Q(dt) (Levy) or t^(-1-1/alpha) (BV).
    pub tail: PartialIntegral,
}

/// The three integral conditions on Q for nu (resp. a BV law) to exist.
pub fn validate_q(q: &MixingMeasure, alpha: f64, mode: QMode) -> Result<QVerdict> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("need alpha > 0, got {alpha}")));
    }
    let power = match mode {
        QMode::Levy => -1.0 - 2.0 / alpha,
        QMode::BoundedVariation => -1.0 - 1.0 / alpha,
    };
    let near_atoms: f64 = q.atoms().iter().filter(|a| a.at <= 1.0).map(|a| a.mass / a.at).sum();
    let tail_atoms: f64 = q
        .atoms()
        .iter()
        .filter(|a| a.at > 1.0)
        .map(|a| a.mass * a.at.powf(power))
        .sum();
    let mut near = PartialIntegral::finite(near_atoms);
    let mut tail = PartialIntegral::finite(tail_atoms);
    if let Some(d) = q.density() {
        let n = d.weighted_integral(|t| if t <= 1.0 { 1.0 / t } else { 0.0 }, -1.0);
        near.value += n.value;
        near.finite &= n.finite;
        let t = d.weighted_integral(|t| if t > 1.0 { t.powf(power) } else { 0.0 }, f64::INFINITY);
        tail.value += t.value;
        tail.finite &= t.finite;
    }
    Ok(QVerdict {
        ok: near.finite && tail.finite,
        atom_at_zero: 0.0,
        near_zero: near,
        tail,
    })
}

/// F(x) = int_(0,x] t^-1 Q(dt) together with its left-continuous inverse.
pub struct FTransform {
    // (location, cumulative F *after* the jump at location)
    atom_cum: Vec<(f64, f64)>,
    atom_masses: Vec<(f64, f64)>, // (location, jump height q/t)
    density: Option<DensityPart>,
    total: f64,
}

struct DensityPart {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    table: IntegralTable,
    lo: f64,
    hi: f64, // table cap (finite)
    // local power-law fit of F beyond the cap: F(x) ~ f_at_cap * (x/hi)^p
    tail_exponent: Option<f64>,
}

impl FTransform {
    pub fn build(q: &MixingMeasure) -> Result<FTransform> {
        let atom_masses: Vec<(f64, f64)> = q.atoms().iter().map(|a| (a.at, a.mass / a.at)).collect();
        let density = match q.density() {
            None => None,
            Some(d) => {
                let lo = d.lo();
                let hi_cap = if d.hi().is_finite() {
                    d.hi()
                } else {
                    // cap where the remaining mass of t^-1 Q is negligible,
                    // or at a large bound for infinite-total measures
                    let mut cap = lo.max(1e-6) * 2.0;
                    let mut best = lo.max(1.0) * 1e9;
                    while cap < best {
                        let rem = scan_tail(|t| d.at(t) / t, cap, 1e-12);
                        if rem.finite && rem.value < 1e-13 {
                            best = cap;
                            break;
                        }
                        if !rem.finite {
                            break;
                        }
                        cap *= 16.0;
                    }
                    best
                };
                let dd = d.clone();
                let f: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(move |t: f64| dd.at(t) / t);
                let table = IntegralTable::build(&|t| f(t), lo, hi_cap, 1e-12)?;
                // fit the growth exponent near the cap for extrapolation
                let tail_exponent = if d.hi().is_finite() {
                    None
                } else {
                    let f1 = table.total();
                    let f0 = table.up_to(&|t| f(t), hi_cap / 4.0);
                    if f1 > f0 && f0 > 0.0 {
                        // F(hi)/F(hi/4) = 4^p
                        Some(((f1 / f0).ln() / (4.0_f64).ln()).max(1e-6))
                    } else {
                        None
                    }
                };
                Some(DensityPart {
                    f,
                    table,
                    lo,
                    hi: hi_cap,
                    tail_exponent,
                })
            }
        };
        let density_total = density.as_ref().map(|d| d.table.total()).unwrap_or(0.0);
        let mut atom_cum = Vec::with_capacity(atom_masses.len());
        let mut acc = 0.0;
        for &(at, jump) in &atom_masses {
            acc += jump;
            atom_cum.push((at, acc));
        }
        let total = if density
            .as_ref()
            .map(|d| d.tail_exponent.is_some())
            .unwrap_or(false)
        {
            f64::INFINITY
        } else {
            acc + density_total
        };
        Ok(FTransform {
            atom_cum,
            atom_masses,
            density,
            total,
        })
    }

    /// Total mass of t^-1 Q (may be infinite).
    pub fn total(&self) -> f64 {
        self.total
    }

    /// F(x), nondecreasing and right-continuous.
    pub fn value(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let i = self.atom_cum.partition_point(|&(at, _)| at <= x);
        let atoms = if i == 0 { 0.0 } else { self.atom_cum[i - 1].1 };
        let dens = match &self.density {
            None => 0.0,
            Some(d) => {
                if x <= d.lo {
                    0.0
                } else if x <= d.hi {
                    d.table.up_to(&|t| (d.f)(t), x)
                } else {
                    match d.tail_exponent {
                        Some(p) => d.table.total() * (x / d.hi).powf(p),
                        None => d.table.total(),
                    }
                }
            }
        };
        atoms + dens
    }

    /// F^<-(t) = inf { y >= 0 : F(y) >= t }, left-continuous, +inf beyond
    /// the total mass.
    pub fn left_inverse(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t > self.total {
            return f64::INFINITY;
        }
        if self.density.is_none() {
            // pure jumps: first atom location where the cumulative reaches t
            for &(at, cum) in &self.atom_cum {
                if cum >= t - 1e-15 * (1.0 + t.abs()) {
                    return at;
                }
            }
            return f64::INFINITY;
        }
        // bracket then bisect on the (piecewise continuous) F
        let mut hi = self
            .atom_cum
            .last()
            .map(|&(at, _)| at)
            .unwrap_or(0.0)
            .max(self.density.as_ref().map(|d| d.hi).unwrap_or(0.0));
        if hi <= 0.0 {
            hi = 1.0;
        }
        while self.value(hi) < t {
            hi *= 2.0;
            if hi.is_infinite() {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0_f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.value(mid) >= t {
                hi = mid;
            } else {
                lo = mid;
            }
            if (hi - lo) <= 1e-12 * hi.max(1.0) || (self.value(hi) - t).abs() <= 1e-10 {
                break;
            }
        }
        hi
    }

    fn atom_jumps(&self) -> &[(f64, f64)] {
        &self.atom_masses
    }

    fn has_density(&self) -> bool {
        self.density.is_some()
    }
}

/// F(x) for a mixing measure.
pub fn f_of(q: &MixingMeasure, x: f64) -> Result<f64> {
    Ok(FTransform::build(q)?.value(x))
}

/// Left-continuous inverse of F; +inf beyond the total mass of t^-1 Q.
pub fn f_left_inverse(q: &MixingMeasure, t: f64) -> Result<f64> {
    Ok(FTransform::build(q)?.left_inverse(t))
}

/// The integrand h_Q(t) = (F^<-(t))^(-1/alpha): left-continuous,
/// nonincreasing, and 0 where F^<- is infinite. Exact steps for atomic Q;
/// density-bearing Q goes through the discretization adaptor with an exact
/// inverse-based tail.
pub fn h_from_q(q: &MixingMeasure, alpha: f64) -> Result<Integrand> {
    let verdict = validate_q(q, alpha, QMode::Levy)?;
    if !verdict.ok {
        return Err(Error::DomainViolation(format!(
            "mixing measure fails the Levy conditions: near-0 integral {} ({}), tail integral {} ({})",
            verdict.near_zero.value,
            if verdict.near_zero.finite { "finite" } else { "divergent" },
            verdict.tail.value,
            if verdict.tail.finite { "finite" } else { "divergent" },
        )));
    }
    if q.is_zero() {
        return Ok(Integrand::zero());
    }
    let ft = FTransform::build(q)?;
    if !ft.has_density() {
        // exact: h = t_j^(-1/alpha) on (c_{j-1}, c_j]
        let mut steps = Vec::with_capacity(ft.atom_jumps().len());
        let mut cum = 0.0;
        for &(at, jump) in ft.atom_jumps() {
            cum += jump;
            steps.push(Step {
                until: cum,
                value: at.powf(-1.0 / alpha),
            });
        }
        return Integrand::from_steps(steps);
    }
    // discretization adaptor: log-spaced breakpoints in s
    let total = ft.total();
    let s_max = if total.is_finite() {
        total
    } else {
        ft.value(1e12).min(1e12).max(1.0)
    };
    let s_min = s_max * 1e-12;
    let n = DISCRETIZATION_BREAKS;
    let log_lo = s_min.ln();
    let log_hi = s_max.ln();
    let mut steps = Vec::with_capacity(n);
    let mut last_value = f64::INFINITY;
    let mut last_break = 0.0_f64;
    for k in 0..n {
        let s = if k + 1 == n {
            s_max
        } else {
            (log_lo + (log_hi - log_lo) * k as f64 / (n as f64 - 1.0)).exp()
        };
        if s <= last_break {
            continue;
        }
        last_break = s;
        let v = ft.left_inverse(s).powf(-1.0 / alpha);
        let v = if v.is_finite() { v } else { 0.0 };
        // keep monotone despite inversion tolerance
        let v = v.min(last_value);
        last_value = v;
        steps.push(Step { until: s, value: v });
    }
    steps.dedup_by(|b, a| {
        if a.value == b.value {
            a.until = b.until;
            true
        } else {
            false
        }
    });
    let tail = if total.is_finite() {
        None
    } else {
        let ft = Arc::new(ft);
        let a = alpha;
        Some(Tail::closure(
            move |s: f64| {
                let y = ft.left_inverse(s);
                if y.is_finite() {
                    y.powf(-1.0 / a)
                } else {
                    0.0
                }
            },
            s_max,
        ))
    };
    Integrand::from_steps_with_tail(steps, tail)
}

/// Recover Q from a nonnegative step integrand: each step of value v > 0 on
/// an interval of length l contributes the atom (v^-alpha, v^-alpha * l).
pub fn q_from_h(h: &Integrand, alpha: f64) -> Result<MixingMeasure> {
    if h.signature() != Signature::Nonnegative {
        return Err(Error::DomainViolation("Q recovery needs a nonnegative integrand".into()));
    }
    let steps = h.steps().ok_or_else(|| {
        Error::Unsupported("Q recovery needs a step integrand; discretize the tail first".into())
    })?;
    if h.tail().is_some() {
        return Err(Error::Unsupported(
            "Q recovery needs a step integrand; discretize the tail first".into(),
        ));
    }
    let kernel = JumpKernel::new(alpha)?;
    let d1 = h.phi_integral(Side::Plus, &|v| kernel.square_vs_one(v));
    if !d1.finite {
        return Err(Error::DomainViolation(
            "integrand is not in Dom: int (|h x|^2 and 1) nu(dx) ds diverges".into(),
        ));
    }
    let mut atoms = Vec::new();
    let mut prev = 0.0;
    for s in steps {
        let len = s.until - prev;
        prev = s.until;
        if s.value > 0.0 {
            let t = s.value.powf(-alpha);
            atoms.push(MassAtom { at: t, mass: t * len });
        }
    }
    MixingMeasure::new(atoms, None)
}

/// Max relative discrepancy over `r_grid` between the two sides of the tail
/// identity int t^-1 e^(-r^alpha t) Q(dt) = int e^(-r^alpha / |h(s)|^alpha) ds.
pub fn tail_identity_check(q: &MixingMeasure, h: &Integrand, alpha: f64, r_grid: &[f64]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &r in r_grid {
        if !(r > 0.0) {
            return Err(Error::invalid("r grid", "radii must be positive"));
        }
        let s = r.powf(alpha);
        let lhs = q.laplace_inv_t(s);
        if !lhs.finite {
            return Err(Error::Divergent("left side of the tail identity".into()));
        }
        let phi = |v: f64| (-(r / v).powf(alpha)).exp();
        let plus = h.phi_integral(Side::Plus, &phi);
        let minus = h.phi_integral(Side::Minus, &phi);
        if !plus.finite || !minus.finite {
            return Err(Error::DomainViolation(
                "right side of the tail identity diverges: h is not in Dom".into(),
            ));
        }
        let rhs = plus.value + minus.value;
        let denom = lhs.value.abs().max(rhs.abs()).max(1e-300);
        worst = worst.max((lhs.value - rhs).abs() / denom);
    }
    Ok(worst)
}

/// The two compound Poisson integrators of the one-dimensional engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorKind {
    /// Symmetric: Levy density |x|^(alpha-1) e^(-|x|^alpha).
    YAlpha,
    /// One-sided: Levy density x^(alpha-1) e^(-x^alpha) on (0, inf).
    ZAlpha,
}

/// Scalar integrals of the one-sided jump density x^(alpha-1) e^(-x^alpha).
pub struct JumpKernel {
    pub alpha: f64,
    total_mass: f64,
    m2_total: f64,
}

impl JumpKernel {
    pub fn new(alpha: f64) -> Result<JumpKernel> {
        if !(alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("need alpha > 0, got {alpha}")));
        }
        Ok(JumpKernel {
            alpha,
            total_mass: 1.0 / alpha,
            m2_total: gamma_fn(1.0 + 2.0 / alpha)? / 2.0,
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        x.powf(self.alpha - 1.0) * (-x.powf(self.alpha)).exp()
    }

    /// nu((c, inf)) = e^(-c^alpha) / alpha.
    pub fn tail(&self, c: f64) -> f64 {
        (-c.powf(self.alpha)).exp() / self.alpha
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// int_0^c x^2 dens(x) dx = (1/alpha) int_0^(c^alpha) u^(2/alpha) e^-u du.
    fn m2(&self, c: f64) -> f64 {
        let top = c.powf(self.alpha);
        if top >= 45.0 {
            return self.m2_total;
        }
        integrate_finite(|u: f64| u.powf(2.0 / self.alpha) * (-u).exp(), 0.0, top, 1e-12)
            .map(|r| r.value / self.alpha)
            .unwrap_or(self.m2_total)
    }

    /// chi(v) = int (|v x|^2 and 1) dens(x) dx over one side.
    pub fn square_vs_one(&self, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let c = 1.0 / v.abs();
        v * v * self.m2(c) + self.tail(c)
    }

    /// psi(v) = int (|v x| and 1) dens(x) dx over one side.
    pub fn abs_vs_one(&self, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let c = 1.0 / v.abs();
        let top = c.powf(self.alpha);
        let m1 = if top >= 45.0 {
            gamma_fn(1.0 + 1.0 / self.alpha).map(|g| g / 1.0).unwrap_or(0.0)
        } else {
            integrate_finite(|u: f64| u.powf(1.0 / self.alpha) * (-u).exp(), 0.0, top, 1e-12)
                .map(|r| r.value)
                .unwrap_or(0.0)
        } / self.alpha;
        v.abs() * m1 + self.tail(c)
    }

    /// phi(v) = int v x / (1 + v^2 x^2) dens(x) dx, the centering integrand.
    pub fn centering(&self, v: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let vv = v;
        integrate_support(
            |x: f64| vv * x / (1.0 + vv * vv * x * x) * self.density(x),
            0.0,
            f64::INFINITY,
            1e-11,
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN)
    }
}

/// Nested integrability levels for stochastic integrals of h.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DomLevel {
    NotIntegrable,
    DomEs,
    Dom,
    DomBv,
}

#[derive(Debug, Clone, Copy)]
pub struct DomChecks {
    /// int ds int (|h x|^2 and 1) nu(dx): the basic integrability condition.
    pub square_vs_one: PartialIntegral,
    /// The local centering integral evaluated on the canonical compact window.
    pub local_centering: f64,
    /// The limiting centering integral, when it exists.
    pub centering_limit: Option<f64>,
    /// int ds int (|h x| and 1) nu(dx): the bounded-variation condition.
    pub abs_vs_one: PartialIntegral,
}

#[derive(Debug, Clone, Copy)]
pub struct DomVerdict {
    pub level: DomLevel,
    pub checks: DomChecks,
}

/// Classify h against the chosen integrator: which of the defining
/// integrals converge, and hence the strongest available integral notion.
pub fn dom_classify(h: &Integrand, integrator: IntegratorKind, alpha: f64) -> Result<DomVerdict> {
    let kernel = JumpKernel::new(alpha)?;

    let chi = |v: f64| kernel.square_vs_one(v);
    let d1_plus = h.phi_integral(Side::Plus, &chi);
    let d1_minus = h.phi_integral(Side::Minus, &chi);
    let sides = match integrator {
        IntegratorKind::YAlpha => 2.0,
        IntegratorKind::ZAlpha => 1.0,
    };
    let square_vs_one = PartialIntegral {
        value: sides * (d1_plus.value + d1_minus.value),
        finite: d1_plus.finite && d1_minus.finite,
    };

    let psi = |v: f64| kernel.abs_vs_one(v);
    let q_plus = h.phi_integral(Side::Plus, &psi);
    let q_minus = h.phi_integral(Side::Minus, &psi);
    let abs_vs_one = PartialIntegral {
        value: sides * (q_plus.value + q_minus.value),
        finite: q_plus.finite && q_minus.finite,
    };

    if !square_vs_one.finite {
        return Ok(DomVerdict {
            level: DomLevel::NotIntegrable,
            checks: DomChecks {
                square_vs_one,
                local_centering: f64::INFINITY,
                centering_limit: None,
                abs_vs_one,
            },
        });
    }

    match integrator {
        IntegratorKind::YAlpha => {
            // symmetric integrator, gamma_Y = 0: the centering conditions
            // hold automatically and Dom coincides with Dom_es
            let level = if abs_vs_one.finite { DomLevel::DomBv } else { DomLevel::Dom };
            Ok(DomVerdict {
                level,
                checks: DomChecks {
                    square_vs_one,
                    local_centering: 0.0,
                    centering_limit: Some(0.0),
                    abs_vs_one,
                },
            })
        }
        IntegratorKind::ZAlpha => {
            let phi = |v: f64| kernel.centering(v);
            // local centering on the canonical window: our integrands are
            // bounded on compacts, so this is always finite; report it
            let window_end = match h.support_end() {
                e if e.is_finite() => (2.0 * e).max(64.0),
                _ => 64.0,
            };
            let l_plus = h.phi_integral_over(Side::Plus, &phi, 1e-3, window_end);
            let l_minus = h.phi_integral_over(Side::Minus, &phi, 1e-3, window_end);
            let local_centering = l_plus.value.abs() + l_minus.value.abs();

            let centering_limit = centering_limit(h, &phi);

            let level = if abs_vs_one.finite {
                DomLevel::DomBv
            } else if centering_limit.is_some() {
                DomLevel::Dom
            } else {
                DomLevel::DomEs
            };
            Ok(DomVerdict {
                level,
                checks: DomChecks {
                    square_vs_one,
                    local_centering,
                    centering_limit,
                    abs_vs_one,
                },
            })
        }
    }
}

/// Limiting centering integral for the one-sided integrator: the improper integral of
/// phi(h+) - phi(h-). Returns its value when it converges.
fn centering_limit(h: &Integrand, phi: &dyn Fn(f64) -> f64) -> Option<f64> {
    match h.interleaved_parts() {
        None => {
            let plus = h.phi_integral(Side::Plus, phi);
            let minus = h.phi_integral(Side::Minus, phi);
            if plus.finite && minus.finite {
                Some(plus.value - minus.value)
            } else {
                None
            }
        }
        Some((plus, minus)) => {
            // alternating block sums over the interleave layout: partial sums
            // at even block counts telescope, so convergence holds iff the
            // block differences vanish
            let mut sum = 0.0_f64;
            let mut recent = f64::INFINITY;
            let mut converged = false;
            for m in 1..400 {
                // integer blocks (m, m+1] and the dyadic pair (2^-m-1, 2^-m]
                let p1 = plus.phi_integral_over(Side::Plus, phi, m as f64, (m + 1) as f64);
                let m1 = minus.phi_integral_over(Side::Plus, phi, m as f64, (m + 1) as f64);
                let lo = (2.0_f64).powi(-m - 1);
                let p2 = plus.phi_integral_over(Side::Plus, phi, lo, 2.0 * lo);
                let m2 = minus.phi_integral_over(Side::Plus, phi, lo, 2.0 * lo);
                if !(p1.finite && m1.finite && p2.finite && m2.finite) {
                    return None;
                }
                let d = (p1.value - m1.value) + (p2.value - m2.value);
                sum += d;
                recent = d.abs().max(p1.value.abs() + m1.value.abs());
                if recent < 1e-12 * (1.0 + sum.abs()) {
                    converged = true;
                    break;
                }
            }
            if converged || recent < 1e-9 {
                Some(sum)
            } else {
                None
            }
        }
    }
}

/// Tail mass of the Levy measure of int h dZ beyond r on the given side:
/// alpha^-1 int e^(-r^alpha / h_side(s)^alpha) ds. For the symmetric
/// integrator pass |h| and read either side.
pub fn levy_tail_of_integral(h: &Integrand, alpha: f64, r: f64, side: Side) -> Result<f64> {
    if !(r > 0.0) || !(alpha > 0.0) {
        return Err(Error::invalid("tail query", "need r > 0 and alpha > 0"));
    }
    let phi = |v: f64| (-(r / v).powf(alpha)).exp();
    let part = h.phi_integral(side, &phi);
    if !part.finite {
        return Err(Error::Divergent(format!("Levy tail of the integral at r = {r}")));
    }
    Ok(part.value / alpha)
}

/// The alternating interleave of two nonnegative integrands: h1 occupies
/// (2n, 2n+1] and the lower dyadic halves, -h_-1 the complements, exactly
/// as the four-branch construction displays.
pub fn interleave(h_plus: &Integrand, h_minus: &Integrand) -> Result<Integrand> {
    for (name, h) in [("h_plus", h_plus), ("h_minus", h_minus)] {
        if h.signature() != Signature::Nonnegative {
            return Err(Error::invalid("interleave", format!("{name} must be nonnegative")));
        }
        if h.interleaved_parts().is_some() {
            return Err(Error::Unsupported("nested interleaves are not supported".into()));
        }
    }
    if h_plus.is_zero() && h_minus.is_zero() {
        return Ok(Integrand::zero());
    }
    Ok(Integrand {
        body: Body::Interleaved {
            plus: Box::new(h_plus.clone()),
            minus: Box::new(h_minus.clone()),
        },
        signature: Signature::Signed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triplet::SupportedDensity;
    use approx::assert_relative_eq;

    #[test]
    fn validate_q_examples() {
        // point mass away from 0 and inf: fine in both modes
        let q = MixingMeasure::dirac(1.0, 1.0);
        for mode in [QMode::Levy, QMode::BoundedVariation] {
            for alpha in [0.5, 1.0, 2.0] {
                let v = validate_q(&q, alpha, mode).unwrap();
                assert!(v.ok);
                assert_eq!(v.near_zero.value, 1.0);
            }
        }

        // density t^-1/2 on (0,1): int_0^1 t^-1 t^-1/2 dt = inf
        let q = MixingMeasure::new(
            vec![],
            Some(SupportedDensity::from_expr("t^(-1/2)", 0.0, 1.0, Some(-0.5)).unwrap()),
        )
        .unwrap();
        let v = validate_q(&q, 1.0, QMode::Levy).unwrap();
        assert!(!v.ok);
        assert!(!v.near_zero.finite);

        // density t^-1 on (1, inf), alpha = 2: tail integral
        // int_1^inf t^(-1-1) t^-1 dt = int t^-3 = 1/2 < inf
        let q = MixingMeasure::new(
            vec![],
            Some(SupportedDensity::from_expr("t^(-1)", 1.0, f64::INFINITY, None).unwrap()),
        )
        .unwrap();
        let v = validate_q(&q, 2.0, QMode::Levy).unwrap();
        assert!(v.ok);
        assert_relative_eq!(v.tail.value, 0.5, max_relative = 1e-8);
    }

    #[test]
    fn f_and_left_inverse_on_atoms() {
        // Q = delta_1: F = 1_[1,inf); inverse 1 on (0,1], inf beyond
        let q = MixingMeasure::dirac(1.0, 1.0);
        let ft = FTransform::build(&q).unwrap();
        assert_eq!(ft.value(0.5), 0.0);
        assert_eq!(ft.value(1.0), 1.0);
        assert_eq!(ft.value(3.0), 1.0);
        assert_eq!(ft.left_inverse(0.5), 1.0);
        assert_eq!(ft.left_inverse(1.0), 1.0);
        assert!(ft.left_inverse(1.1).is_infinite());

        // Q = w delta_a: step height w/a
        let (w, a) = (3.0, 2.0);
        let q = MixingMeasure::dirac(a, w);
        let ft = FTransform::build(&q).unwrap();
        assert_eq!(ft.left_inverse(w / a), a);
        assert!(ft.left_inverse(w / a + 1e-9).is_infinite());

        // zero measure
        let ft = FTransform::build(&MixingMeasure::zero()).unwrap();
        assert_eq!(ft.value(5.0), 0.0);
        assert!(ft.left_inverse(0.1).is_infinite());
    }

    #[test]
    fn h_from_q_atomic_examples() {
        // Q = delta_1: h = 1 on (0,1]
        let h = h_from_q(&MixingMeasure::dirac(1.0, 1.0), 2.0).unwrap();
        assert_eq!(h.steps().unwrap(), &[Step { until: 1.0, value: 1.0 }]);
        assert_eq!(h.eval(0.5), 1.0);
        assert_eq!(h.eval(1.0), 1.0);
        assert_eq!(h.eval(1.0 + 1e-12), 0.0);

        // Q = w delta_a: h = a^(-1/alpha) on (0, w/a]
        let (w, a, alpha) = (3.0, 2.0, 0.5);
        let h = h_from_q(&MixingMeasure::dirac(a, w), alpha).unwrap();
        assert_eq!(
            h.steps().unwrap(),
            &[Step {
                until: w / a,
                value: a.powf(-1.0 / alpha)
            }]
        );

        // Q = delta_1 + delta_2, alpha = 1: h = 1 on (0,1], 1/2 on (1, 3/2]
        let q = MixingMeasure::new(
            vec![MassAtom { at: 1.0, mass: 1.0 }, MassAtom { at: 2.0, mass: 1.0 }],
            None,
        )
        .unwrap();
        let h = h_from_q(&q, 1.0).unwrap();
        assert_eq!(
            h.steps().unwrap(),
            &[
                Step { until: 1.0, value: 1.0 },
                Step { until: 1.5, value: 0.5 }
            ]
        );
    }

    #[test]
    fn q_from_h_examples() {
        // h = 1 on (0,1] -> Q = delta_1
        let q = q_from_h(&Integrand::indicator(1.0, 1.0), 1.0).unwrap();
        assert_eq!(q.atoms(), &[MassAtom { at: 1.0, mass: 1.0 }]);

        // h = 2 on (0,3], alpha = 1 -> atom at 1/2, mass 3/2
        let q = q_from_h(&Integrand::indicator(2.0, 3.0), 1.0).unwrap();
        assert_eq!(q.atoms(), &[MassAtom { at: 0.5, mass: 1.5 }]);

        // h = 0 -> zero measure
        let q = q_from_h(&Integrand::zero(), 1.0).unwrap();
        assert!(q.is_zero());
    }

    #[test]
    fn round_trip_h_q_h_on_steps() {
        let h = Integrand::from_steps(vec![
            Step { until: 0.7, value: 3.0 },
            Step { until: 2.0, value: 1.0 },
            Step { until: 2.5, value: 0.25 },
        ])
        .unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let q = q_from_h(&h, alpha).unwrap();
            let back = h_from_q(&q, alpha).unwrap();
            for t in [0.1, 0.69, 0.71, 1.9, 2.1, 2.49, 2.6, 10.0] {
                assert_relative_eq!(back.eval(t), h.eval(t), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn tail_identity_on_matched_pairs() {
        // Q = delta_1, alpha = 1, r = 1: both sides e^-1, error 0
        let q = MixingMeasure::dirac(1.0, 1.0);
        let h = h_from_q(&q, 1.0).unwrap();
        let err = tail_identity_check(&q, &h, 1.0, &[1.0]).unwrap();
        assert!(err <= 1e-14, "error {err}");

        // Q = w delta_a: both sides (w/a) e^(-r^alpha a)
        let q = MixingMeasure::dirac(2.0, 3.0);
        for alpha in [0.5, 1.0, 2.0] {
            let h = h_from_q(&q, alpha).unwrap();
            let err = tail_identity_check(&q, &h, alpha, &[0.25, 0.5, 1.0, 2.0, 4.0]).unwrap();
            assert!(err <= 1e-12, "alpha {alpha}: error {err}");
            let lhs = q.laplace_inv_t(1.0_f64.powf(alpha)).value;
            assert_relative_eq!(lhs, 3.0 / 2.0 * (-2.0_f64).exp(), epsilon = 1e-14);
        }

        // Q = delta_1 + delta_2
        let q = MixingMeasure::new(
            vec![MassAtom { at: 1.0, mass: 1.0 }, MassAtom { at: 2.0, mass: 1.0 }],
            None,
        )
        .unwrap();
        let h = h_from_q(&q, 1.0).unwrap();
        let err = tail_identity_check(&q, &h, 1.0, &[0.5, 1.0, 2.0, 4.0]).unwrap();
        assert!(err <= 1e-10, "error {err}");
    }

    #[test]
    fn levy_tail_examples() {
        // h = 1_(0,1], alpha = 1, r = 1: tail = e^-1
        let h = Integrand::indicator(1.0, 1.0);
        let t = levy_tail_of_integral(&h, 1.0, 1.0, Side::Plus).unwrap();
        assert_relative_eq!(t, (-1.0_f64).exp(), epsilon = 1e-14);

        // negative side of a nonnegative integrand is empty
        let t = levy_tail_of_integral(&h, 1.0, 1.0, Side::Minus).unwrap();
        assert_eq!(t, 0.0);

        // scaling: h = c 1_(0,1] has tail alpha^-1 e^(-(r/c)^alpha)
        for (alpha, c, r) in [(0.5, 2.0, 1.0), (2.0, 0.5, 0.75)] {
            let h = Integrand::indicator(c, 1.0);
            let t = levy_tail_of_integral(&h, alpha, r, Side::Plus).unwrap();
            assert_relative_eq!(t, (-(r / c as f64).powf(alpha)).exp() / alpha, epsilon = 1e-13);
        }
    }

    #[test]
    fn dom_classify_examples() {
        // bounded-support indicator: dom_bv under both integrators
        let h = Integrand::indicator(1.0, 1.0);
        for integ in [IntegratorKind::YAlpha, IntegratorKind::ZAlpha] {
            let v = dom_classify(&h, integ, 1.0).unwrap();
            assert_eq!(v.level, DomLevel::DomBv, "{integ:?}");
            assert!(v.checks.square_vs_one.finite);
            assert!(v.checks.abs_vs_one.finite);
        }

        // Levy conditions hold but the BV conditions fail: Q = delta_1 + growth density
        // t^(3/(2 alpha)) on (1, inf) -> dom under Y but not dom_bv
        let alpha = 1.0_f64;
        let q = MixingMeasure::new(
            vec![MassAtom { at: 1.0, mass: 1.0 }],
            Some(SupportedDensity::from_expr("t^(3/2)", 1.0, f64::INFINITY, None).unwrap()),
        )
        .unwrap();
        // oracle for the gap itself
        let vq = validate_q(&q, alpha, QMode::Levy).unwrap();
        assert!(vq.ok, "Levy conditions must hold: {vq:?}");
        let vq3 = validate_q(&q, alpha, QMode::BoundedVariation).unwrap();
        assert!(!vq3.ok, "BV conditions must fail: {vq3:?}");

        let h = h_from_q(&q, alpha).unwrap();
        let v = dom_classify(&h, IntegratorKind::YAlpha, alpha).unwrap();
        assert_eq!(v.level, DomLevel::Dom, "checks: {:?}", v.checks);

        // under the one-sided integrator the centering integral diverges:
        // one-sided infinite variation blocks the limiting centering: no dom level
        let v = dom_classify(&h, IntegratorKind::ZAlpha, alpha).unwrap();
        assert_eq!(v.level, DomLevel::DomEs, "checks: {:?}", v.checks);

        // unbounded increasing h: not integrable at all
        let h = Integrand::from_steps_with_tail(
            vec![Step { until: 1.0, value: 1.0 }],
            Some(Tail::expr("t", 1.0).unwrap()),
        )
        .unwrap();
        let v = dom_classify(&h, IntegratorKind::ZAlpha, 1.0).unwrap();
        assert_eq!(v.level, DomLevel::NotIntegrable);
    }

    #[test]
    fn interleave_layout_and_tails() {
        let h1 = Integrand::indicator(1.0, 1.0);
        let h = interleave(&h1, &h1).unwrap();

        // branch layout: (2,3] carries h1 on (1,2] which is 0; the dyadic
        // block (1, 1.5] carries h1 on (0.5, 1] = 1
        assert_eq!(h.eval(1.2), 1.0);
        assert_eq!(h.eval(1.7), -1.0);
        assert_eq!(h.eval(0.6), 1.0); // k=1: (0.5, 0.75] -> h1(t - 0.25)
        assert_eq!(h.eval(0.8), -1.0);
        assert_eq!(h.eval(2.5), 0.0);

        // tails decompose by side and match the branch tails exactly
        for r in [0.5, 1.0, 2.0] {
            let plus = levy_tail_of_integral(&h, 1.0, r, Side::Plus).unwrap();
            let minus = levy_tail_of_integral(&h, 1.0, r, Side::Minus).unwrap();
            let branch = levy_tail_of_integral(&h1, 1.0, r, Side::Plus).unwrap();
            assert_relative_eq!(plus, branch, epsilon = 1e-13);
            assert_relative_eq!(minus, branch, epsilon = 1e-13);
        }

        // symmetric interleave of equal branches is Dom under Z: the
        // alternating centering blocks cancel pairwise
        let v = dom_classify(&h, IntegratorKind::ZAlpha, 1.0).unwrap();
        assert!(v.level >= DomLevel::Dom, "level {:?}", v.level);
        assert_relative_eq!(v.checks.centering_limit.unwrap(), 0.0, epsilon = 1e-12);

        // one empty side: the signed tails reduce to a rearranged h_plus
        let h0 = interleave(&h1, &Integrand::zero()).unwrap();
        let plus = levy_tail_of_integral(&h0, 1.0, 1.0, Side::Plus).unwrap();
        let branch = levy_tail_of_integral(&h1, 1.0, 1.0, Side::Plus).unwrap();
        assert_relative_eq!(plus, branch, epsilon = 1e-13);
        assert_eq!(levy_tail_of_integral(&h0, 1.0, 1.0, Side::Minus).unwrap(), 0.0);

        // both zero: zero integrand
        assert!(interleave(&Integrand::zero(), &Integrand::zero()).unwrap().is_zero());
    }

    #[test]
    fn interleave_rejects_signed_branches() {
        let signed = Integrand::from_steps(vec![Step { until: 1.0, value: -1.0 }]).unwrap();
        assert!(interleave(&signed, &Integrand::zero()).is_err());
    }

    #[test]
    fn h_from_q_monotone_structure_is_exact() {
        let q = MixingMeasure::new(
            vec![
                MassAtom { at: 0.5, mass: 2.0 },
                MassAtom { at: 1.0, mass: 1.0 },
                MassAtom { at: 4.0, mass: 8.0 },
            ],
            None,
        )
        .unwrap();
        let h = h_from_q(&q, 1.0).unwrap();
        let steps = h.steps().unwrap();
        assert!(steps.windows(2).all(|w| w[0].value > w[1].value), "nonincreasing");
        assert!(steps.windows(2).all(|w| w[0].until < w[1].until), "breaks increase");
        // left continuity at each break: value at break equals step value
        let mut prev = 0.0;
        for s in steps {
            let inside = 0.5 * (prev + s.until);
            assert_eq!(h.eval(inside), s.value);
            assert_eq!(h.eval(s.until), s.value);
            prev = s.until;
        }
    }

    #[test]
    fn eq_q2_equivalence_with_levy_validation() {
        use crate::triplet::{CmRep, LevyMeasure, RadialMeasure, SupportedDensity};
        // a CM-represented radial measure is a Levy measure iff its mixing
        // measure satisfies the Levy conditions on Q; check a passing and a
        // failing pair for each alpha
        let passing = MixingMeasure::new(
            vec![MassAtom { at: 0.5, mass: 1.0 }, MassAtom { at: 3.0, mass: 2.0 }],
            None,
        )
        .unwrap();
        let failing = MixingMeasure::new(
            vec![],
            Some(SupportedDensity::from_expr("t^(-1/2)", 0.0, 1.0, Some(-0.5)).unwrap()),
        )
        .unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            for (q, expect) in [(&passing, true), (&failing, false)] {
                let verdict = validate_q(q, alpha, QMode::Levy).unwrap();
                assert_eq!(verdict.ok, expect, "validate_q alpha={alpha}");
                let nu = LevyMeasure::one_sided(RadialMeasure::CmRep(
                    CmRep::new(alpha, q.clone()).unwrap(),
                ));
                let report = nu.validate();
                assert_eq!(report.ok, expect, "levy validation alpha={alpha}: {report:?}");
            }
        }
    }

    #[test]
    fn q_recovery_matches_laplace_transforms() {
        // round trip Q -> h -> Q preserves the Laplace transform
        let q = MixingMeasure::new(
            vec![MassAtom { at: 0.5, mass: 1.0 }, MassAtom { at: 3.0, mass: 2.0 }],
            None,
        )
        .unwrap();
        for alpha in [0.5, 1.0, 2.0] {
            let h = h_from_q(&q, alpha).unwrap();
            let back = q_from_h(&h, alpha).unwrap();
            let mut s = 0.1;
            while s <= 10.0 {
                assert_relative_eq!(
                    back.laplace(s).unwrap(),
                    q.laplace(s).unwrap(),
                    max_relative = 1e-9
                );
                s *= 1.8;
            }
        }
    }
}
