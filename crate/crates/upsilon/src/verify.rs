//! Named verification suites: each runs one battery of identities at its
//! pinned tolerance and reports per-criterion pass/fail. The CLI `verify`
//! subcommand and the acceptance tests are thin wrappers around these.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classes::{
    cm_test, default_grid, embed_e_alpha_in_e_beta, is_member, is_member_e_alpha, ClassTag,
    DEFAULT_CM_TOL, DEFAULT_MAX_ORDER,
};
use crate::error::{Error, Result};
use crate::mappings::{compose_check, transform_cumulant, transform_triplet, Kernel, KernelKind};
use crate::numerics::{exp_integral_e1, gamma_fn, scan_tail};
use crate::qrep::{
    dom_classify, h_from_q, q_from_h, tail_identity_check, validate_q, DomLevel,
    IntegratorKind, QMode,
};
use crate::simulate::{
    ecf_compare, improper_integral_sample, ks_distance, replicate_rng, sample_path_with,
    simulate_mapped_law, PathLaw, Schedule,
};
use crate::triplet::{
    CmRep, GeneratingTriplet, LevyMeasure, MassAtom, MixingMeasure, RadialMeasure, SupportedDensity,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub passed: bool,
    pub observed: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub criteria: Vec<CriterionResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, observed: f64, threshold: f64) {
        self.criteria.push(CriterionResult {
            name: name.into(),
            passed: observed <= threshold,
            observed,
            threshold,
        });
    }

    fn push_bool(&mut self, name: impl Into<String>, passed: bool) {
        self.criteria.push(CriterionResult {
            name: name.into(),
            passed,
            observed: if passed { 0.0 } else { 1.0 },
            threshold: 0.0,
        });
    }
}

fn cp_dirac_1() -> GeneratingTriplet {
    GeneratingTriplet::compound_poisson_1d(LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0)))
        .expect("valid compound Poisson")
}

fn cp_exp_density() -> GeneratingTriplet {
    GeneratingTriplet::compound_poisson_1d(LevyMeasure::one_sided(
        RadialMeasure::density_expr("exp(-r)", 0.0, f64::INFINITY, Some(0.0)).expect("parses"),
    ))
    .expect("valid compound Poisson")
}

fn z_grid_13() -> Vec<f64> {
    (0..13).map(|i| -3.0 + 0.5 * i as f64).collect()
}

/// Gaussian factor: transformed A equals Gamma(1 + 2/alpha) A.
pub fn gaussian_factor() -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "gaussian-factor".into(),
        criteria: vec![],
    };
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        for a in [1.0, 2.5] {
            let kernel = Kernel::new(KernelKind::EAlpha(alpha))?;
            let out = transform_triplet(&kernel, &GeneratingTriplet::gaussian_1d(a))?;
            let expect = gamma_fn(1.0 + 2.0 / alpha)? * a;
            let rel = (out.gaussian()[0] - expect).abs() / expect.abs();
            report.push(format!("gaussian factor alpha={alpha} A={a}"), rel, 1e-10);
        }
    }
    Ok(report)
}

/// Kernel identity: n_alpha(x) = E1(x^alpha)/alpha against direct
/// quadrature, and the inversion round trip n_alpha^*(n_alpha(x)) = x.
pub fn kernel_identity() -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "kernel-identity".into(),
        criteria: vec![],
    };
    for alpha in [0.5, 1.0, 2.0, 3.0] {
        let kernel = Kernel::new(KernelKind::NAlpha(alpha))?;
        let mut worst_id = 0.0_f64;
        let mut worst_inv = 0.0_f64;
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let direct = scan_tail(|u: f64| (-u.powf(alpha)).exp() / u, x, 1e-13);
            let closed = exp_integral_e1(x.powf(alpha))? / alpha;
            worst_id = worst_id.max((direct.value - closed).abs());
            let back = kernel.evaluate(closed);
            worst_inv = worst_inv.max((back - x).abs());
        }
        report.push(format!("n_alpha vs E1 identity alpha={alpha}"), worst_id, 1e-10);
        report.push(format!("n_alpha inversion round trip alpha={alpha}"), worst_inv, 1e-8);
    }
    Ok(report)
}

/// Composition: Phi o E_alpha = E_alpha o Phi = N_alpha at the cumulant
/// level on 13 z-points in [-3, 3].
pub fn compose() -> Result<SuiteReport> {
    compose_at(None)
}

/// Same, restricted to a single exponent when one is given.
pub fn compose_at(alpha: Option<f64>) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "compose".into(),
        criteria: vec![],
    };
    let z = z_grid_13();
    let inputs: Vec<(&str, GeneratingTriplet)> = vec![
        ("gaussian A=1", GeneratingTriplet::gaussian_1d(1.0)),
        ("cp(delta_1)", cp_dirac_1()),
        ("cp(exp density)", cp_exp_density()),
    ];
    let alphas: Vec<f64> = match alpha {
        Some(a) => vec![a],
        None => vec![1.0, 2.0],
    };
    for alpha in alphas {
        for (name, mu) in &inputs {
            let r = compose_check(alpha, mu, &z)?;
            report.push(format!("compose alpha={alpha} mu={name}"), r.max_discrepancy, 1e-7);
        }
    }
    Ok(report)
}

/// Symmetry equivalence under E_alpha, both directions, on a battery of
/// 6 symmetric and 6 asymmetric triplets.
pub fn symmetry() -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "symmetry".into(),
        criteria: vec![],
    };
    let tol = 1e-9;
    let sym_radial = RadialMeasure::density_expr("exp(-r)", 0.0, f64::INFINITY, Some(0.0))?;
    let symmetric: Vec<GeneratingTriplet> = vec![
        GeneratingTriplet::jump_1d(LevyMeasure::symmetric_1d(RadialMeasure::atom(1.0, 1.0)), 0.0)?,
        GeneratingTriplet::jump_1d(LevyMeasure::symmetric_1d(RadialMeasure::atom(0.5, 2.0)), 0.0)?,
        GeneratingTriplet::jump_1d(
            LevyMeasure::symmetric_1d(RadialMeasure::Atoms(vec![
                MassAtom { at: 0.5, mass: 1.0 },
                MassAtom { at: 2.0, mass: 0.25 },
            ])),
            0.0,
        )?,
        GeneratingTriplet::jump_1d(LevyMeasure::symmetric_1d(sym_radial.clone()), 0.0)?,
        GeneratingTriplet::jump_1d(
            LevyMeasure::symmetric_1d(RadialMeasure::CmRep(CmRep::new(1.0, MixingMeasure::dirac(2.0, 1.0))?)),
            0.0,
        )?,
        GeneratingTriplet::new(
            1,
            vec![0.7],
            LevyMeasure::symmetric_1d(RadialMeasure::atom(1.0, 0.5)),
            vec![0.0],
        )?,
    ];
    let asymmetric: Vec<GeneratingTriplet> = vec![
        cp_dirac_1(),
        GeneratingTriplet::jump_1d(LevyMeasure::one_sided(RadialMeasure::atom(1.0, 1.0)), 0.0)?,
        GeneratingTriplet::jump_1d(LevyMeasure::symmetric_1d(RadialMeasure::atom(1.0, 1.0)), 0.3)?,
        GeneratingTriplet::jump_1d(LevyMeasure::one_sided(sym_radial), 0.0)?,
        GeneratingTriplet::new(
            1,
            vec![0.0],
            LevyMeasure::new(vec![
                crate::triplet::Direction {
                    xi: vec![1.0],
                    weight: 2.0,
                    radial: RadialMeasure::atom(1.0, 1.0),
                },
                crate::triplet::Direction {
                    xi: vec![-1.0],
                    weight: 1.0,
                    radial: RadialMeasure::atom(1.0, 1.0),
                },
            ])?,
            vec![0.0],
        )?,
        GeneratingTriplet::jump_1d(
            LevyMeasure::one_sided(RadialMeasure::CmRep(CmRep::new(2.0, MixingMeasure::dirac(1.0, 1.0))?)),
            0.1,
        )?,
    ];
    for alpha in [1.0, 2.0] {
        let kernel = Kernel::new(KernelKind::EAlpha(alpha))?;
        let mut ok = true;
        for (i, mu) in symmetric.iter().enumerate() {
            if !mu.is_symmetric(tol) {
                ok = false;
                report.push_bool(format!("battery: input {i} should be symmetric"), false);
                continue;
            }
            let out = transform_triplet(&kernel, mu)?;
            if !out.is_symmetric(tol) {
                ok = false;
            }
        }
        for (i, mu) in asymmetric.iter().enumerate() {
            if mu.is_symmetric(tol) {
                ok = false;
                report.push_bool(format!("battery: input {i} should be asymmetric"), false);
                continue;
            }
            let out = transform_triplet(&kernel, mu)?;
            if out.is_symmetric(tol) {
                ok = false;
            }
        }
        report.push_bool(format!("symmetry equivalence under E_{alpha} (both directions)"), ok);
    }
    Ok(report)
}

/// Range and inclusion: every E_alpha output is in E_alpha, and embeds into
/// E_beta for beta in {2 alpha, 3 alpha} with pointwise density agreement.
pub fn range_inclusion() -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "range-inclusion".into(),
        criteria: vec![],
    };
    let inputs: Vec<(&str, GeneratingTriplet)> = vec![
        ("cp(delta_1)", cp_dirac_1()),
        (
            "cp(two atoms)",
            GeneratingTriplet::compound_poisson_1d(LevyMeasure::one_sided(RadialMeasure::Atoms(vec![
                MassAtom { at: 0.5, mass: 1.0 },
                MassAtom { at: 2.0, mass: 0.5 },
            ])))?,
        ),
        ("cp(exp density)", cp_exp_density()),
    ];
    for alpha in [0.5, 1.0, 2.0] {
        let kernel = Kernel::new(KernelKind::EAlpha(alpha))?;
        for (name, mu) in &inputs {
            let out = transform_triplet(&kernel, mu)?;
            let verdict = is_member_e_alpha(out.levy(), alpha, DEFAULT_CM_TOL)?;
            report.push_bool(format!("range: E_{alpha}({name}) in E_{alpha}"), verdict.passed());

            // embedding: per-direction CM representations move to beta
            for factor in [2.0, 3.0] {
                let beta = factor * alpha;
                let mut worst = 0.0_f64;
                let mut embedded_ok = true;
                for d in out.levy().directions() {
                    let rep = match &d.radial {
                        RadialMeasure::CmRep(c) => c.clone(),
                        other => crate::classes::radial_of_transform(other, alpha)?,
                    };
                    let emb = embed_e_alpha_in_e_beta(&rep, beta)?;
                    embedded_ok &= emb.verdict.passed;
                    let mut r = 0.05_f64;
                    while r <= 20.0 {
                        worst = worst.max((emb.density_at(r) - rep.density_at(r)).abs());
                        r *= 1.45;
                    }
                    let nu_beta = LevyMeasure::one_sided(emb.to_radial(Some(alpha - 1.0)));
                    embedded_ok &= is_member_e_alpha(&nu_beta, beta, DEFAULT_CM_TOL)?.passed();
                }
                report.push(
                    format!("embedding density match: E_{alpha}({name}) at beta={beta}"),
                    worst,
                    1e-9,
                );
                report.push_bool(
                    format!("embedding membership: E_{alpha}({name}) at beta={beta}"),
                    embedded_ok,
                );
            }
        }
    }
    Ok(report)
}

/// Tail identity and the Q <-> h round trip on atomic mixing measures.
pub fn tail_identity() -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "tail-identity".into(),
        criteria: vec![],
    };
    let r_grid = [0.25, 0.5, 1.0, 2.0, 4.0];
    let qs: Vec<(&str, MixingMeasure)> = vec![
        ("delta_1", MixingMeasure::dirac(1.0, 1.0)),
        ("3 delta_2", MixingMeasure::dirac(2.0, 3.0)),
        (
            "delta_1 + delta_2",
            MixingMeasure::new(
                vec![MassAtom { at: 1.0, mass: 1.0 }, MassAtom { at: 2.0, mass: 1.0 }],
                None,
            )?,
        ),
    ];
    for alpha in [0.5, 1.0, 2.0] {
        for (name, q) in &qs {
            let h = h_from_q(q, alpha)?;
            let err = tail_identity_check(q, &h, alpha, &r_grid)?;
            report.push(format!("tail identity alpha={alpha} Q={name}"), err, 1e-8);

            let back = q_from_h(&h, alpha)?;
            let mut worst = 0.0_f64;
            let mut s = 0.1;
            while s <= 10.0 {
                worst = worst.max((back.laplace(s)? - q.laplace(s)?).abs());
                s *= 1.6;
            }
            report.push(format!("Q -> h -> Q Laplace match alpha={alpha} Q={name}"), worst, 1e-9);
        }
    }
    Ok(report)
}

/// Jump law: KS distance of sampled magnitudes against e^(-x^alpha) below
/// the 1% critical value.
pub fn jump_law(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "jump-law".into(),
        criteria: vec![],
    };
    let n = 100_000usize;
    let crit = 1.628 / (n as f64).sqrt();
    for alpha in [0.5, 1.0, 2.0] {
        let law = PathLaw::y_alpha(alpha)?;
        let mut rng = replicate_rng(seed, 0);
        let path = sample_path_with(&law, n as f64 / law.rate, seed, &mut rng);
        let mut mags: Vec<f64> = path.jumps.iter().map(|j| j.abs()).collect();
        let d = ks_distance(&mut mags, |x: f64| 1.0 - (-x.powf(alpha)).exp());
        report.push(format!("Weibull jump law KS alpha={alpha} (n={})", mags.len()), d, crit);
    }
    Ok(report)
}

/// Monte Carlo law closure: the simulated integral against Y^(1) for
/// Q = delta_1 and the simulated E_1 image of CP(delta_1) both match their
/// quadrature characteristic functions.
pub fn mc_law(n: usize, seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "mc-law".into(),
        criteria: vec![],
    };
    if n < 10_000 {
        return Err(Error::invalid("mc-law", "need n >= 10^4 for the ECF bound"));
    }
    let z = z_grid_13();

    // part 1: int h_{delta_1} dY^(1), h = 1_(0,1]
    let h = h_from_q(&MixingMeasure::dirac(1.0, 1.0), 1.0)?;
    let law = PathLaw::y_alpha(1.0)?;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = replicate_rng(seed, i as u64);
            let path = sample_path_with(&law, 1.0, seed, &mut rng);
            crate::simulate::integral_sample(&h, &path, 0.0, 1.0)
        })
        .collect();
    // model law: no Gaussian part, gamma 0, both-sided tails e^-r
    let model_triplet = GeneratingTriplet::jump_1d(
        LevyMeasure::symmetric_1d(RadialMeasure::CmRep(CmRep::new(1.0, MixingMeasure::dirac(1.0, 1.0))?)),
        0.0,
    )?;
    let model: Vec<Complex64> = z
        .iter()
        .map(|&zi| model_triplet.cumulant(&[zi]).map(|c| c.exp()))
        .collect::<Result<Vec<_>>>()?;
    let ecf = ecf_compare(&samples, &model, &z)?;
    report.push(format!("ECF gap: int h dY^(1) vs quadrature CF (n={n})"), ecf.max_abs_gap, 0.015);

    // part 2: E_1(CP(delta_1)) sampled vs exp(transformed cumulant)
    let mu = cp_dirac_1();
    let kernel = Kernel::new(KernelKind::EAlpha(1.0))?;
    let samples = simulate_mapped_law(&kernel, &mu, n, seed.wrapping_add(1))?;
    let model: Vec<Complex64> = z
        .iter()
        .map(|&zi| transform_cumulant(&kernel, &mu, &[zi]).map(|c| c.exp()))
        .collect::<Result<Vec<_>>>()?;
    let ecf = ecf_compare(&samples, &model, &z)?;
    report.push(format!("ECF gap: simulate E_1(CP(delta_1)) vs cumulant (n={n})"), ecf.max_abs_gap, 0.015);
    Ok(report)
}

/// Negative controls: the refusal and failure paths fire where they must.
pub fn negative_controls() -> Result<SuiteReport> {
    let mut report = SuiteReport {
        suite: "negative-controls".into(),
        criteria: vec![],
    };

    // a mixing measure failing the Levy conditions is rejected
    let bad_q = MixingMeasure::new(
        vec![],
        Some(SupportedDensity::from_expr("t^(-1/2)", 0.0, 1.0, Some(-0.5))?),
    )?;
    let verdict = validate_q(&bad_q, 1.0, QMode::Levy)?;
    report.push_bool("validate_Q rejects t^(-1/2) density near 0", !verdict.ok);
    report.push_bool("h_from_Q refuses the rejected Q", h_from_q(&bad_q, 1.0).is_err());

    // L-class check fails on increasing k
    let uniform = LevyMeasure::one_sided(RadialMeasure::density_expr("1", 0.0, 1.0, Some(0.0))?);
    let l = is_member(ClassTag::L, &uniform, DEFAULT_CM_TOL)?;
    report.push_bool("L-class fails on increasing k(r) = r on (0,1)", !l.passed());

    // cm_test fails on the Gaussian bump with a witness
    let bump = cm_test(
        |r: f64| (-(r - 1.0) * (r - 1.0)).exp(),
        &default_grid(),
        DEFAULT_MAX_ORDER,
        DEFAULT_CM_TOL,
    )?;
    report.push_bool(
        "cm_test rejects exp(-(r-1)^2) with a witness",
        !bump.passed && bump.witness.is_some(),
    );

    // one-sided infinite-variation witness: the Levy conditions hold, the
    // BV conditions fail, and the candidate h_Q reaches no dom level under Z
    let alpha = 1.0;
    let q_gap = MixingMeasure::new(
        vec![MassAtom { at: 1.0, mass: 1.0 }],
        Some(SupportedDensity::from_expr("t^(3/2)", 1.0, f64::INFINITY, None)?),
    )?;
    let eq_q = validate_q(&q_gap, alpha, QMode::Levy)?;
    let eq_q3 = validate_q(&q_gap, alpha, QMode::BoundedVariation)?;
    report.push_bool("witness satisfies the Levy but not the BV conditions", eq_q.ok && !eq_q3.ok);
    let h = h_from_q(&q_gap, alpha)?;
    let dom = dom_classify(&h, IntegratorKind::ZAlpha, alpha)?;
    report.push_bool(
        "no dom level for the witness under Z (essential only)",
        dom.level == DomLevel::DomEs,
    );
    let refused = improper_integral_sample(&h, IntegratorKind::ZAlpha, alpha, 7, &Schedule::default(), None);
    report.push_bool(
        "improper sampling refuses the witness without centering",
        matches!(refused, Err(Error::DomainViolation(_))),
    );
    Ok(report)
}
