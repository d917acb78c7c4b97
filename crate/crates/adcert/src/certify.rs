//! Theorem-backed verdicts for a single parameter point.
//!
//! For networks whose every layer carries bias parameters the
//! non-differentiability question has an exact answer: the function is
//! non-differentiable at `w` iff some pre-activation sits on a kink of its
//! activation while the reverse-mode partial with respect to that neuron is
//! non-zero — and wherever the function is differentiable, AD computes the
//! true derivative. Without full bias structure two sufficient conditions
//! still apply (kinks avoided by all critical neurons certify the standard
//! derivative; consistent policies with no-bias layers clear of `ncdf`
//! certify a Clarke limit). Everything else falls through to the oracle.

use crate::ad::{reverse_ad, reverse_ad_at, vec_is_zero, Mat};
use crate::network::Subject;
use crate::oracle::{differentiability_quick_at, oracle_clarke_limit_at, OracleBudget, OracleVerdict};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum CertifyError {
    #[error("the bias decision requires every layer to carry (unpinned) bias parameters")]
    RequiresBias,
    #[error(transparent)]
    Network(#[from] crate::network::NetworkError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    DiffCorrect,
    DiffIncorrect,
    NonDiffClarke,
    NonDiffNotClarke,
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::DiffCorrect => "DiffCorrect",
            Verdict::DiffIncorrect => "DiffIncorrect",
            Verdict::NonDiffClarke => "NonDiffClarke",
            Verdict::NonDiffNotClarke => "NonDiffNotClarke",
            Verdict::Unknown => "Unknown",
        }
    }

    pub fn is_nondiff(&self) -> bool {
        matches!(self, Verdict::NonDiffClarke | Verdict::NonDiffNotClarke)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Certificate {
    ThmBiasEquivalence,
    ThmBiasClarke,
    SuffStd,
    SuffClarke,
    Oracle,
    None,
}

impl Certificate {
    pub fn as_str(&self) -> &'static str {
        match self {
            Certificate::ThmBiasEquivalence => "ThmBiasEquivalence",
            Certificate::ThmBiasClarke => "ThmBiasClarke",
            Certificate::SuffStd => "SuffStd",
            Certificate::SuffClarke => "SuffClarke",
            Certificate::Oracle => "Oracle",
            Certificate::None => "None",
        }
    }
}

/// Verdict for one point, with provenance.
#[derive(Clone, Debug)]
pub struct Classification {
    pub verdict: Verdict,
    /// For differentiable verdicts, the true gradient over the free
    /// parameters (equals the AD output exactly when `DiffCorrect`).
    pub derivative_claim: Option<Mat>,
    pub certificate: Certificate,
    /// Kink witness `(layer, neuron)` when the bias decision found one.
    pub witness: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub enum BiasDecision {
    Differentiable(Mat),
    NonDifferentiable { witness: (usize, usize) },
}

fn bias_kink_witness(subject: &Subject, report: &crate::ad::ADReport) -> Option<(usize, usize)> {
    for (l, layer) in subject.network.layers().iter().enumerate() {
        for i in 0..layer.out_dim {
            let y = &report.trace.y[l][i];
            let bp = layer.activations[i].breakpoints();
            if !bp.ndf.is_empty() && bp.ndf.contains(y) && !vec_is_zero(&report.hidden[l][i]) {
                return Some((l, i));
            }
        }
    }
    None
}

fn project_jacobian(subject: &Subject, report: &crate::ad::ADReport) -> Mat {
    report
        .jacobian
        .iter()
        .map(|row| subject.project_row(row))
        .collect()
}

/// The exact bias-network decision: non-differentiable iff some neuron
/// touches a kink with a non-zero reverse-mode partial.
pub fn decide_bias(
    subject: &Subject,
    w_free: &[Rat],
) -> Result<BiasDecision, CertifyError> {
    if !subject.has_bias() {
        return Err(CertifyError::RequiresBias);
    }
    let w = subject.embed(w_free)?;
    let report = reverse_ad(&subject.network, &w)?;
    match bias_kink_witness(subject, &report) {
        Some(witness) => Ok(BiasDecision::NonDifferentiable { witness }),
        None => Ok(BiasDecision::Differentiable(project_jacobian(
            subject, &report,
        ))),
    }
}

fn sufficient_std_from(subject: &Subject, report: &crate::ad::ADReport) -> Option<Mat> {
    for (l, layer) in subject.network.layers().iter().enumerate() {
        let layer_bias = subject.layer_has_bias(l);
        for i in 0..layer.out_dim {
            let bp = layer.activations[i].breakpoints();
            if bp.ndf.is_empty() || !bp.ndf.contains(&report.trace.y[l][i]) {
                continue;
            }
            if !layer_bias || !vec_is_zero(&report.hidden[l][i]) {
                return None;
            }
        }
    }
    Some(project_jacobian(subject, report))
}

/// Sufficient condition for the standard derivative: every neuron that
/// either lives in a layer without bias parameters or has a non-zero
/// downstream partial stays clear of its activation's kinks. Returns the
/// certified gradient (the AD output).
pub fn sufficient_std(subject: &Subject, w_free: &[Rat]) -> Option<Mat> {
    let w = subject.embed(w_free).ok()?;
    let report = reverse_ad(&subject.network, &w).ok()?;
    sufficient_std_from(subject, &report)
}

fn sufficient_clarke_from(subject: &Subject, trace: &crate::network::ForwardTrace) -> bool {
    let all_consistent = subject
        .network
        .layers()
        .iter()
        .flat_map(|l| l.activations.iter())
        .all(|a| a.is_consistent());
    if !all_consistent {
        return false;
    }
    for (l, layer) in subject.network.layers().iter().enumerate() {
        if subject.layer_has_bias(l) {
            continue;
        }
        for i in 0..layer.out_dim {
            if layer.activations[i]
                .breakpoints()
                .ncdf
                .contains(&trace.y[l][i])
            {
                return false;
            }
        }
    }
    true
}

/// Sufficient condition for a Clarke limit: every activation policy is
/// consistent and no neuron of a no-bias layer touches a point where its
/// activation fails to be continuously differentiable.
pub fn sufficient_clarke(subject: &Subject, w_free: &[Rat]) -> bool {
    let w = match subject.embed(w_free) {
        Ok(w) => w,
        Err(_) => return false,
    };
    match subject.network.forward(&w) {
        Ok(trace) => sufficient_clarke_from(subject, &trace),
        Err(_) => false,
    }
}

/// Classify one point: bias theorems, then sufficient conditions, then the
/// oracle. `Unknown` only when the oracle is inconclusive.
pub fn classify(subject: &Subject, w_free: &[Rat], budget: &OracleBudget) -> Classification {
    let w = subject.embed(w_free).expect("free vector length");
    let trace = subject
        .network
        .forward(&w)
        .expect("parameter count checked");
    classify_at(subject, w, trace, budget)
}

/// Classification reusing an existing forward trace. Reverse-mode AD runs
/// only when a decision actually needs hidden partials or the AD jacobian.
pub fn classify_at(
    subject: &Subject,
    w: Vec<Rat>,
    trace: crate::network::ForwardTrace,
    budget: &OracleBudget,
) -> Classification {
    // Which neurons sit on kinks, and whether any of them lives in a layer
    // without (unpinned) bias parameters.
    let mut touched_any = false;
    let mut touched_nobias = false;
    for (l, layer) in subject.network.layers().iter().enumerate() {
        for i in 0..layer.out_dim {
            let bp = layer.activations[i].breakpoints();
            if !bp.ndf.is_empty() && bp.ndf.contains(&trace.y[l][i]) {
                touched_any = true;
                if !subject.layer_has_bias(l) {
                    touched_nobias = true;
                }
            }
        }
    }
    // Lazy reverse pass.
    let mut report: Option<crate::ad::ADReport> = None;
    macro_rules! get_report {
        () => {{
            if report.is_none() {
                report = Some(reverse_ad_at(&subject.network, &w, trace.clone()));
            }
            report.as_ref().unwrap()
        }};
    }

    if !touched_any {
        // No kink touched anywhere: AD is the exact derivative. Report the
        // strongest applicable certificate to keep the theorem precedence.
        let certificate = if subject.has_bias() {
            Certificate::ThmBiasEquivalence
        } else {
            Certificate::SuffStd
        };
        let r = get_report!();
        return Classification {
            verdict: Verdict::DiffCorrect,
            derivative_claim: Some(project_jacobian(subject, r)),
            certificate,
            witness: None,
        };
    }

    let consistent_policies = subject
        .network
        .layers()
        .iter()
        .flat_map(|l| l.activations.iter())
        .all(|a| a.is_consistent());

    if subject.has_bias() {
        let r = get_report!();
        match bias_kink_witness(subject, r) {
            None => {
                return Classification {
                    verdict: Verdict::DiffCorrect,
                    derivative_claim: Some(project_jacobian(subject, r)),
                    certificate: Certificate::ThmBiasEquivalence,
                    witness: None,
                };
            }
            Some(witness) => {
                if consistent_policies {
                    return Classification {
                        verdict: Verdict::NonDiffClarke,
                        derivative_claim: None,
                        certificate: Certificate::ThmBiasClarke,
                        witness: Some(witness),
                    };
                }
                // Inconsistent policy: the Clarke guarantee genuinely fails
                // in general; ask the oracle about this AD output.
                let ad = project_jacobian(subject, r);
                let verdict = if oracle_clarke_limit_at(subject, &w, &trace, &ad, budget) {
                    Verdict::NonDiffClarke
                } else {
                    Verdict::NonDiffNotClarke
                };
                return Classification {
                    verdict,
                    derivative_claim: None,
                    certificate: Certificate::Oracle,
                    witness: Some(witness),
                };
            }
        }
    }

    // The standard-derivative sufficiency cannot fire when a no-bias layer
    // touches a kink, so the hidden partials are only needed otherwise.
    if !touched_nobias {
        let r = get_report!();
        if let Some(g) = sufficient_std_from(subject, r) {
            return Classification {
                verdict: Verdict::DiffCorrect,
                derivative_claim: Some(g),
                certificate: Certificate::SuffStd,
                witness: None,
            };
        }
    }

    if sufficient_clarke_from(subject, &trace) {
        // AD output is the derivative or a Clarke limit; the oracle
        // distinguishes which.
        return match differentiability_quick_at(subject, &w, &trace, budget) {
            OracleVerdict::Differentiable(_) => {
                let r = get_report!();
                Classification {
                    verdict: Verdict::DiffCorrect,
                    derivative_claim: Some(project_jacobian(subject, r)),
                    certificate: Certificate::SuffClarke,
                    witness: None,
                }
            }
            OracleVerdict::NonDifferentiable(_) => Classification {
                verdict: Verdict::NonDiffClarke,
                derivative_claim: None,
                certificate: Certificate::SuffClarke,
                witness: None,
            },
            OracleVerdict::Inconclusive(_) => Classification {
                verdict: Verdict::Unknown,
                derivative_claim: None,
                certificate: Certificate::None,
                witness: None,
            },
        };
    }

    match differentiability_quick_at(subject, &w, &trace, budget) {
        OracleVerdict::Differentiable(g) => {
            let r = get_report!();
            let ad = project_jacobian(subject, r);
            if ad == g {
                Classification {
                    verdict: Verdict::DiffCorrect,
                    derivative_claim: Some(g),
                    certificate: Certificate::Oracle,
                    witness: None,
                }
            } else {
                Classification {
                    verdict: Verdict::DiffIncorrect,
                    derivative_claim: Some(g),
                    certificate: Certificate::Oracle,
                    witness: None,
                }
            }
        }
        OracleVerdict::NonDifferentiable(_) => {
            // Without overrides at the touched breakpoints the AD output is
            // the active selection jacobian, so a ray into the active
            // region already certifies the Clarke property without
            // materializing any jacobian.
            let overrides_touched = subject.network.layers().iter().enumerate().any(|(l, layer)| {
                (0..layer.out_dim).any(|i| {
                    layer.activations[i]
                        .overrides()
                        .contains_key(&trace.y[l][i])
                })
            });
            if !overrides_touched
                && crate::oracle::active_region_accumulates(subject, &w, &trace)
            {
                return Classification {
                    verdict: Verdict::NonDiffClarke,
                    derivative_claim: None,
                    certificate: Certificate::Oracle,
                    witness: None,
                };
            }
            let r = get_report!();
            let ad = project_jacobian(subject, r);
            let verdict = if oracle_clarke_limit_at(subject, &w, &trace, &ad, budget) {
                Verdict::NonDiffClarke
            } else {
                Verdict::NonDiffNotClarke
            };
            Classification {
                verdict,
                derivative_claim: None,
                certificate: Certificate::Oracle,
                witness: None,
            }
        }
        OracleVerdict::Inconclusive(_) => Classification {
            verdict: Verdict::Unknown,
            derivative_claim: None,
            certificate: Certificate::None,
            witness: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::{fixture, FixtureSpec};
    use crate::network::{Layer, LayerKind, MultiPoly, Network, Subject, Term};
    use crate::rat::rat;
    use crate::scalarfun::{relu, relu_with_adf0};

    fn budget(free: usize) -> OracleBudget {
        OracleBudget::for_width(free)
    }

    fn relu_bias_subject(adf0: Option<Rat>) -> Subject {
        let act = match adf0 {
            None => relu(),
            Some(c) => relu_with_adf0(c).unwrap(),
        };
        let net = Network::new(
            vec![Layer {
                in_dim: 1,
                out_dim: 1,
                params: 1,
                kind: LayerKind::AffineWithBias {
                    maps: vec![MultiPoly::zero()],
                },
                activations: vec![act],
            }],
            vec![rat(0, 1)],
        )
        .unwrap();
        Subject::unpinned(net)
    }

    /// `z = ReLU(v1) * u + v2` over parameters `(v1, u, v2)`.
    fn relu_times_u_subject() -> Subject {
        let l1 = Layer {
            in_dim: 1,
            out_dim: 1,
            params: 1,
            kind: LayerKind::AffineWithBias {
                maps: vec![MultiPoly::zero()],
            },
            activations: vec![relu()],
        };
        let l2 = Layer {
            in_dim: 1,
            out_dim: 1,
            params: 2,
            kind: LayerKind::AffineWithBias {
                maps: vec![MultiPoly {
                    terms: vec![Term {
                        coef: rat(1, 1),
                        xs: vec![0],
                        us: vec![0],
                    }],
                }],
            },
            activations: vec![crate::scalarfun::identity()],
        };
        Subject::unpinned(Network::new(vec![l1, l2], vec![rat(0, 1)]).unwrap())
    }

    #[test]
    fn bias_decision_on_relu() {
        let s = relu_bias_subject(None);
        match decide_bias(&s, &[rat(0, 1)]).unwrap() {
            BiasDecision::NonDifferentiable { witness } => assert_eq!(witness, (0, 0)),
            d => panic!("{d:?}"),
        }
        match decide_bias(&s, &[rat(1, 1)]).unwrap() {
            BiasDecision::Differentiable(g) => assert_eq!(g, vec![vec![rat(1, 1)]]),
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn bias_decision_zero_partial_is_differentiable() {
        // At (0, 0, 0) the kink is touched but the downstream partial is
        // u = 0, so the function is differentiable with gradient (0, 0, 1).
        let s = relu_times_u_subject();
        match decide_bias(&s, &[rat(0, 1), rat(0, 1), rat(0, 1)]).unwrap() {
            BiasDecision::Differentiable(g) => {
                assert_eq!(g, vec![vec![rat(0, 1), rat(0, 1), rat(1, 1)]]);
            }
            d => panic!("{d:?}"),
        }
        // With u = 1 the same kink is critical.
        match decide_bias(&s, &[rat(0, 1), rat(1, 1), rat(0, 1)]).unwrap() {
            BiasDecision::NonDifferentiable { witness } => assert_eq!(witness, (0, 0)),
            d => panic!("{d:?}"),
        }
    }

    #[test]
    fn requires_bias_is_enforced() {
        let f = fixture(&FixtureSpec::parse("intro_identity").unwrap()).unwrap();
        assert!(matches!(
            decide_bias(&f.subject, &[rat(0, 1)]),
            Err(CertifyError::RequiresBias)
        ));
    }

    #[test]
    fn sufficient_std_examples() {
        let f = fixture(&FixtureSpec::parse("intro_identity").unwrap()).unwrap();
        assert!(sufficient_std(&f.subject, &[rat(1, 1)]).is_some());
        assert!(sufficient_std(&f.subject, &[rat(0, 1)]).is_none());
        // Bias net with zero downstream partial at the kink.
        let s = relu_times_u_subject();
        assert!(sufficient_std(&s, &[rat(0, 1), rat(0, 1), rat(0, 1)]).is_some());
    }

    #[test]
    fn sufficient_clarke_examples() {
        // All-bias consistent network: certificate at any point.
        let s = relu_bias_subject(None);
        assert!(sufficient_clarke(&s, &[rat(0, 1)]));
        // No-bias layer at its kink: no certificate.
        let f = fixture(&FixtureSpec::parse("intro_identity").unwrap()).unwrap();
        assert!(!sufficient_clarke(&f.subject, &[rat(0, 1)]));
        // Inconsistent override: no certificate.
        let s = relu_bias_subject(Some(rat(5, 1)));
        assert!(!sufficient_clarke(&s, &[rat(0, 1)]));
    }

    #[test]
    fn classify_intro_examples() {
        let b = budget(1);
        let f = fixture(&FixtureSpec::parse("intro_identity").unwrap()).unwrap();
        let c = classify(&f.subject, &[rat(0, 1)], &b);
        assert_eq!(c.verdict, Verdict::DiffIncorrect);
        assert_eq!(c.derivative_claim, Some(vec![vec![rat(1, 1)]]));
        let f = fixture(&FixtureSpec::parse("intro_half").unwrap()).unwrap();
        let c = classify(&f.subject, &[rat(0, 1)], &b);
        assert_eq!(c.verdict, Verdict::NonDiffNotClarke);
    }

    #[test]
    fn classify_bias_relu() {
        let b = budget(1);
        let s = relu_bias_subject(None);
        let c = classify(&s, &[rat(0, 1)], &b);
        assert_eq!(c.verdict, Verdict::NonDiffClarke);
        assert_eq!(c.certificate, Certificate::ThmBiasClarke);
        let c = classify(&s, &[rat(2, 1)], &b);
        assert_eq!(c.verdict, Verdict::DiffCorrect);
        assert_eq!(c.certificate, Certificate::ThmBiasEquivalence);
    }

    #[test]
    fn classify_inconsistent_override_fails_clarke() {
        let b = budget(1);
        let s = relu_bias_subject(Some(rat(5, 1)));
        let c = classify(&s, &[rat(0, 1)], &b);
        assert_eq!(c.verdict, Verdict::NonDiffNotClarke);
        assert_eq!(c.certificate, Certificate::Oracle);
        // A consistent-but-unusual override (value 1 via the right slope)
        // keeps the Clarke guarantee.
        let s = relu_bias_subject(Some(rat(1, 1)));
        let c = classify(&s, &[rat(0, 1)], &b);
        assert_eq!(c.verdict, Verdict::NonDiffClarke);
    }
}
