//! JSON wire formats for triplets, Levy measures, mixing measures,
//! integrands and verdicts.
//!
//! Densities travel as expression strings in the tiny arithmetic grammar,
//! as explicit step functions, or as log-log interpolation tables. Closure
//! densities produced by transforms are materialized onto a 400-node
//! geometric grid over [1e-4, 50] when serialized; reading a table back
//! yields a monotone log-log interpolant.

use serde::{Deserialize, Serialize};

use crate::classes::{ClassTag, ClassVerdict, CmVerdict};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::qrep::{Integrand, QVerdict, Signature, Step, Tail};
use crate::triplet::{
    CmRep, Direction, DensityFn, GeneratingTriplet, LevyMeasure, MassAtom, MixingMeasure,
    RadialMeasure, SupportedDensity,
};

pub const TABLE_GRID_LO: f64 = 1e-4;
pub const TABLE_GRID_HI: f64 = 50.0;
pub const TABLE_GRID_NODES: usize = 400;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripletJson {
    pub dim: usize,
    pub gaussian: Vec<Vec<f64>>,
    pub gamma: Vec<f64>,
    pub levy: LevyJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevyJson {
    pub directions: Vec<DirectionJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionJson {
    pub xi: Vec<f64>,
    pub weight: f64,
    pub radial: RadialJson,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialJson {
    Atoms {
        atoms: Vec<RadialAtomJson>,
    },
    Density {
        #[serde(flatten)]
        density: DensityJson,
    },
    Cmrep {
        alpha: f64,
        mixing: MixingJson,
    },
    Sum {
        parts: Vec<RadialJson>,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadialAtomJson {
    pub r: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MassAtomJson {
    pub t: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingJson {
    #[serde(default)]
    pub atoms: Vec<MassAtomJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityJson>,
}

/// One of: an expression string, an explicit step function, or an
/// interpolation table. `hi = null` means an unbounded support.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct DensityJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<StepsJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableJson>,
    #[serde(default)]
    pub lo: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub near_zero_exponent: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepsJson {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default)]
    pub beyond: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub r: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegrandJson {
    pub steps: Vec<StepJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepJson {
    pub t: f64,
    pub v: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailJson {
    pub expr: String,
    pub from: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassVerdictJson {
    pub class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub per_direction: Vec<DirectionVerdictJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionVerdictJson {
    pub xi: Vec<f64>,
    pub passed: bool,
    /// Omitted when the failure is structural (no finite violation size).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_violation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WitnessJson {
    pub point: f64,
    pub order: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QVerdictJson {
    pub ok: bool,
    pub atom_at_zero: f64,
    pub near_zero: PartialJson,
    pub tail: PartialJson,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PartialJson {
    pub value: f64,
    pub finite: bool,
}

// ---- conversions: domain -> json ----

fn density_to_json(d: &SupportedDensity) -> DensityJson {
    let mut out = DensityJson {
        lo: d.lo(),
        hi: if d.hi().is_finite() { Some(d.hi()) } else { None },
        near_zero_exponent: d.near_zero_exponent(),
        ..DensityJson::default()
    };
    match d.kind() {
        DensityFn::Expr(e) => out.expr = Some(e.to_string()),
        DensityFn::Steps { breaks, values, beyond } => {
            out.steps = Some(StepsJson {
                breaks: breaks.clone(),
                values: values.clone(),
                beyond: *beyond,
            })
        }
        DensityFn::Closure(_) => {
            // materialize on the documented geometric grid
            let lo = d.lo().max(TABLE_GRID_LO);
            let hi = d.hi().min(TABLE_GRID_HI);
            let (llo, lhi) = (lo.ln(), hi.ln());
            let mut r = Vec::with_capacity(TABLE_GRID_NODES);
            let mut v = Vec::with_capacity(TABLE_GRID_NODES);
            for i in 0..TABLE_GRID_NODES {
                let x = (llo + (lhi - llo) * i as f64 / (TABLE_GRID_NODES as f64 - 1.0)).exp();
                r.push(x);
                v.push(d.at(x));
            }
            out.table = Some(TableJson { r, v });
            out.lo = lo;
            out.hi = Some(hi);
        }
    }
    out
}

fn density_from_json(j: &DensityJson) -> Result<SupportedDensity> {
    let hi = j.hi.unwrap_or(f64::INFINITY);
    let provided = [j.expr.is_some(), j.steps.is_some(), j.table.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if provided != 1 {
        return Err(Error::invalid(
            "density",
            "exactly one of expr / steps / table must be given",
        ));
    }
    if let Some(src) = &j.expr {
        return SupportedDensity::from_expr(src, j.lo, hi, j.near_zero_exponent);
    }
    if let Some(s) = &j.steps {
        return SupportedDensity::from_steps(s.breaks.clone(), s.values.clone(), s.beyond);
    }
    let table = j.table.as_ref().expect("counted above");
    if table.r.len() != table.v.len() || table.r.len() < 2 {
        return Err(Error::invalid("density table", "need matching r/v arrays with >= 2 nodes"));
    }
    if table.r.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("density table", "r grid must be increasing"));
    }
    if table.v.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::invalid("density table", "values must be finite and nonnegative"));
    }
    let r = table.r.clone();
    let v = table.v.clone();
    let (lo, hi_t) = (r[0], *r.last().expect("non-empty"));
    let f = move |x: f64| -> f64 {
        if x < r[0] || x > r[r.len() - 1] {
            return 0.0;
        }
        let i = r.partition_point(|&g| g < x).clamp(1, r.len() - 1);
        let (r0, r1, v0, v1) = (r[i - 1], r[i], v[i - 1], v[i]);
        if v0 > 0.0 && v1 > 0.0 {
            // monotone log-log interpolation
            let w = (x.ln() - r0.ln()) / (r1.ln() - r0.ln());
            (v0.ln() + w * (v1.ln() - v0.ln())).exp()
        } else {
            let w = (x - r0) / (r1 - r0);
            v0 + w * (v1 - v0)
        }
    };
    Ok(SupportedDensity::from_fn(f, lo, hi_t, j.near_zero_exponent))
}

fn mixing_to_json(m: &MixingMeasure) -> MixingJson {
    MixingJson {
        atoms: m.atoms().iter().map(|a| MassAtomJson { t: a.at, q: a.mass }).collect(),
        density: m.density().map(density_to_json),
    }
}

fn mixing_from_json(j: &MixingJson) -> Result<MixingMeasure> {
    let atoms = j.atoms.iter().map(|a| MassAtom { at: a.t, mass: a.q }).collect();
    let density = j.density.as_ref().map(density_from_json).transpose()?;
    MixingMeasure::new(atoms, density)
}

pub fn radial_to_json(r: &RadialMeasure) -> RadialJson {
    match r {
        RadialMeasure::Atoms(atoms) => RadialJson::Atoms {
            atoms: atoms.iter().map(|a| RadialAtomJson { r: a.at, w: a.mass }).collect(),
        },
        RadialMeasure::Density(d) => RadialJson::Density {
            density: density_to_json(d),
        },
        RadialMeasure::CmRep(c) => RadialJson::Cmrep {
            alpha: c.alpha,
            mixing: mixing_to_json(&c.mixing),
        },
        RadialMeasure::Sum(parts) => RadialJson::Sum {
            parts: parts.iter().map(radial_to_json).collect(),
        },
    }
}

pub fn radial_from_json(j: &RadialJson) -> Result<RadialMeasure> {
    Ok(match j {
        RadialJson::Atoms { atoms } => {
            RadialMeasure::Atoms(atoms.iter().map(|a| MassAtom { at: a.r, mass: a.w }).collect())
        }
        RadialJson::Density { density } => RadialMeasure::Density(density_from_json(density)?),
        RadialJson::Cmrep { alpha, mixing } => {
            RadialMeasure::CmRep(CmRep::new(*alpha, mixing_from_json(mixing)?)?)
        }
        RadialJson::Sum { parts } => {
            RadialMeasure::Sum(parts.iter().map(radial_from_json).collect::<Result<Vec<_>>>()?)
        }
    })
}

pub fn levy_to_json(nu: &LevyMeasure) -> LevyJson {
    LevyJson {
        directions: nu
            .directions()
            .iter()
            .map(|d| DirectionJson {
                xi: d.xi.clone(),
                weight: d.weight,
                radial: radial_to_json(&d.radial),
            })
            .collect(),
    }
}

pub fn levy_from_json(j: &LevyJson) -> Result<LevyMeasure> {
    let directions = j
        .directions
        .iter()
        .map(|d| {
            Ok(Direction {
                xi: d.xi.clone(),
                weight: d.weight,
                radial: radial_from_json(&d.radial)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LevyMeasure::new(directions)
}

pub fn triplet_to_json(mu: &GeneratingTriplet) -> TripletJson {
    let d = mu.dim();
    let gaussian = (0..d)
        .map(|i| mu.gaussian()[i * d..(i + 1) * d].to_vec())
        .collect();
    TripletJson {
        dim: d,
        gaussian,
        gamma: mu.gamma().to_vec(),
        levy: levy_to_json(mu.levy()),
    }
}

pub fn triplet_from_json(j: &TripletJson) -> Result<GeneratingTriplet> {
    let mut gaussian = Vec::with_capacity(j.dim * j.dim);
    for row in &j.gaussian {
        if row.len() != j.dim {
            return Err(Error::DimensionMismatch(row.len(), j.dim));
        }
        gaussian.extend_from_slice(row);
    }
    GeneratingTriplet::new(j.dim, gaussian, levy_from_json(&j.levy)?, j.gamma.clone())
}

pub fn integrand_to_json(h: &Integrand) -> Result<IntegrandJson> {
    let steps = h.steps().ok_or_else(|| {
        Error::Unsupported("interleaved integrands do not serialize; serialize the two branches".into())
    })?;
    let tail = match h.tail() {
        None => None,
        Some(t) => match t.as_expr() {
            Some(e) => Some(TailJson {
                expr: e.to_string(),
                from: t.from(),
            }),
            None => {
                return Err(Error::Unsupported(
                    "closure tails do not serialize; discretize into steps first".into(),
                ))
            }
        },
    };
    Ok(IntegrandJson {
        steps: steps.iter().map(|s| StepJson { t: s.until, v: s.value }).collect(),
        tail,
        signature: Some(
            match h.signature() {
                Signature::Nonnegative => "nonnegative",
                Signature::Signed => "signed",
            }
            .to_string(),
        ),
    })
}

pub fn integrand_from_json(j: &IntegrandJson) -> Result<Integrand> {
    let steps: Vec<Step> = j.steps.iter().map(|s| Step { until: s.t, value: s.v }).collect();
    let tail = j.tail.as_ref().map(|t| Tail::expr(&t.expr, t.from)).transpose()?;
    Integrand::from_steps_with_tail(steps, tail)
}

pub fn mixing_measure_to_json(q: &MixingMeasure) -> MixingJson {
    mixing_to_json(q)
}

pub fn mixing_measure_from_json(j: &MixingJson) -> Result<MixingMeasure> {
    mixing_from_json(j)
}

pub fn class_verdict_to_json(v: &ClassVerdict) -> ClassVerdictJson {
    let class = match v.class {
        ClassTag::B => "B",
        ClassTag::L => "L",
        ClassTag::M => "M",
        ClassTag::T => "T",
        ClassTag::EAlpha => "E",
    };
    ClassVerdictJson {
        class: class.to_string(),
        alpha: v.alpha,
        per_direction: v
            .per_direction
            .iter()
            .map(|d| direction_verdict_to_json(&d.xi, &d.verdict))
            .collect(),
    }
}

fn direction_verdict_to_json(xi: &[f64], v: &CmVerdict) -> DirectionVerdictJson {
    DirectionVerdictJson {
        xi: xi.to_vec(),
        passed: v.passed,
        max_violation: if v.max_violation.is_finite() {
            Some(v.max_violation)
        } else {
            None
        },
        witness: v.witness.map(|w| WitnessJson {
            point: w.point,
            order: w.order,
        }),
        note: v.note.clone(),
    }
}

pub fn q_verdict_to_json(v: &QVerdict) -> QVerdictJson {
    QVerdictJson {
        ok: v.ok,
        atom_at_zero: v.atom_at_zero,
        near_zero: PartialJson {
            value: v.near_zero.value,
            finite: v.near_zero.finite,
        },
        tail: PartialJson {
            value: v.tail.value,
            finite: v.tail.finite,
        },
    }
}

/// Substituted expression for the mixing density of an E_alpha transform of
/// an expression density: q(t) = rho(t^(-1/alpha)) t^(-1/alpha). Keeps CLI
/// outputs exact when the input was an expression.
pub fn substituted_mixing_expr(rho: &Expr, alpha: f64) -> Expr {
    let inner = Expr::parse(&format!("t^(-1/{alpha})")).expect("fixed template parses");
    rho.subst(&inner).mul(inner)
}
