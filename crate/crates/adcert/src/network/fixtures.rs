//! Named example networks with known answer sheets.
//!
//! The `intro_*` fixtures are the classic one-parameter counterexamples
//! (an identity program AD differentiates wrongly at the origin, a kinked
//! program whose AD output is not any limiting gradient, and a grid
//! adversary that is wrong at every grid point). The `thm*` fixtures are
//! the families that realize the density lower bounds: separable kink sums
//! behind bias layers, positive kinked activations behind biaffine layers,
//! and transversal zero crossings multiplied by a shared scale parameter.
//!
//! Some fixtures need an auxiliary output-layer bias frozen at a constant;
//! those slots are pinned in the returned `Subject` and the answer sheet
//! reports the free grid the claims refer to.

use crate::network::{Layer, LayerKind, MultiPoly, Network, NetworkError, Subject, Term};
use crate::poly::{Ext, Poly};
use crate::rat::Rat;
use crate::scalarfun::{
    hermite_zero_slope1, identity, make_piecewise, relu, Piece, PiecewiseFn, ScalarFunError,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("unknown fixture {0:?}")]
    UnknownName(String),
    #[error("bad fixture parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    ScalarFun(#[from] ScalarFunError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

/// Which exhaustive tally a lower-bound claim constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundSet {
    NonDiff,
    Incorrect,
}

/// `|set| / |grid|^Wfree >= factor * sum / |grid|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LowerBoundClaim {
    pub set: BoundSet,
    pub factor: Rat,
    /// The breakpoint sum the bound is stated against (e.g. total kink
    /// count, or total kink-or-zero-boundary count, over all neurons).
    pub sum: Rat,
}

/// What is known in closed form about a fixture.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AnswerSheet {
    pub name: String,
    /// The grid the fixture was constructed for, when it takes one.
    pub grid: Option<Vec<Rat>>,
    /// For affine fixtures: the restricted function is `x -> x + shift`.
    pub affine_shift: Option<Rat>,
    pub lower_bound: Option<LowerBoundClaim>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub subject: Subject,
    pub answers: AnswerSheet,
}

/// Parsed fixture selector, e.g. `thm3_bias_lb,M=16eq,n=3,a=2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FixtureSpec {
    pub name: String,
    pub m: Option<Vec<Rat>>,
    pub n: Option<usize>,
    pub alpha: Option<usize>,
    pub lambda: Option<Rat>,
}

impl FixtureSpec {
    pub fn parse(s: &str) -> Result<Self, FixtureError> {
        let mut parts = s.split(',');
        let name = parts.next().unwrap_or("").trim().to_string();
        let mut spec = FixtureSpec {
            name,
            m: None,
            n: None,
            alpha: None,
            lambda: None,
        };
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| FixtureError::BadParams(format!("expected key=value in {part:?}")))?;
            match key.trim() {
                "M" | "m" => spec.m = Some(parse_grid_param(value.trim())?),
                "n" => {
                    spec.n = Some(value.trim().parse().map_err(|_| {
                        FixtureError::BadParams(format!("bad n {value:?}"))
                    })?)
                }
                "a" | "alpha" => {
                    spec.alpha = Some(value.trim().parse().map_err(|_| {
                        FixtureError::BadParams(format!("bad alpha {value:?}"))
                    })?)
                }
                "l" | "lambda" => {
                    spec.lambda = Some(value.trim().parse().map_err(|_| {
                        FixtureError::BadParams(format!("bad lambda {value:?}"))
                    })?)
                }
                other => {
                    return Err(FixtureError::BadParams(format!("unknown key {other:?}")));
                }
            }
        }
        Ok(spec)
    }
}

/// Grid parameter forms: `16eq` (that many consecutive integers centered at
/// zero), `eq:lo:hi:count`, or `list:r1:r2:...`.
pub fn parse_grid_param(s: &str) -> Result<Vec<Rat>, FixtureError> {
    let bad = |m: String| FixtureError::BadParams(m);
    if let Some(k) = s.strip_suffix("eq") {
        let k: i64 = k
            .parse()
            .map_err(|_| bad(format!("bad grid size in {s:?}")))?;
        if k < 1 {
            return Err(bad("grid needs at least one element".into()));
        }
        let lo = -(k / 2);
        return Ok((0..k).map(|i| Rat::from_int(lo + i)).collect());
    }
    if let Some(rest) = s.strip_prefix("eq:") {
        let fields: Vec<&str> = rest.split(':').collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected eq:lo:hi:count, got {s:?}")));
        }
        let lo: Rat = fields[0].parse().map_err(|_| bad("bad lo".into()))?;
        let hi: Rat = fields[1].parse().map_err(|_| bad("bad hi".into()))?;
        let count: usize = fields[2].parse().map_err(|_| bad("bad count".into()))?;
        return equispaced(&lo, &hi, count).map_err(bad);
    }
    if let Some(rest) = s.strip_prefix("list:") {
        let mut out = Vec::new();
        for f in rest.split(':') {
            out.push(f.parse::<Rat>().map_err(|e| bad(e.to_string()))?);
        }
        out.sort();
        out.dedup();
        return Ok(out);
    }
    Err(bad(format!("unknown grid form {s:?}")))
}

pub fn equispaced(lo: &Rat, hi: &Rat, count: usize) -> Result<Vec<Rat>, String> {
    if count == 0 {
        return Err("count must be positive".into());
    }
    if count == 1 {
        return Ok(vec![lo.clone()]);
    }
    if lo >= hi {
        return Err("lo must be below hi".into());
    }
    let step = (hi - lo) / Rat::from_int(count as i64 - 1);
    Ok((0..count)
        .map(|i| lo + &(&step * &Rat::from_int(i as i64)))
        .collect())
}

pub fn fixture(spec: &FixtureSpec) -> Result<Fixture, FixtureError> {
    match spec.name.as_str() {
        "intro_identity" => intro_two_relu(Rat::one(), "intro_identity"),
        "intro_half" => intro_two_relu(Rat::new(1, 2), "intro_half"),
        "intro_grid_adversary" => {
            let m = need_m(spec)?;
            let lambda = spec
                .lambda
                .clone()
                .ok_or_else(|| FixtureError::BadParams("intro_grid_adversary needs lambda".into()))?;
            intro_grid_adversary(&m, &lambda)
        }
        "thm3_bias_lb" => {
            let (m, n, alpha) = need_mna(spec)?;
            check_ratio(&m, n, alpha, 2)?;
            thm3_bias_lb(&m, n, alpha)
        }
        "thm7_ndf_lb_kinks" => {
            let (m, n, alpha) = need_mna(spec)?;
            check_ratio(&m, n, alpha, 4)?;
            thm7_ndf_lb_kinks(&m, n, alpha)
        }
        "thm7_ndf_lb_zeros" => {
            let (m, n, alpha) = need_mna(spec)?;
            check_ratio(&m, n, alpha, 4)?;
            thm7_ndf_lb_zeros(&m, n, alpha)
        }
        "thm9_inc_lb_kinks" => {
            let (m, n, alpha) = need_mna(spec)?;
            check_ratio(&m, n, alpha, 4)?;
            thm9_inc_lb_kinks(&m, n, alpha)
        }
        "thm9_inc_lb_zeros" => {
            let (m, n, alpha) = need_mna(spec)?;
            check_ratio(&m, n, alpha, 4)?;
            thm9_inc_lb_zeros(&m, n, alpha)
        }
        other => Err(FixtureError::UnknownName(other.to_string())),
    }
}

pub fn fixture_names() -> &'static [&'static str] {
    &[
        "intro_identity",
        "intro_half",
        "intro_grid_adversary",
        "thm3_bias_lb",
        "thm7_ndf_lb_kinks",
        "thm7_ndf_lb_zeros",
        "thm9_inc_lb_kinks",
        "thm9_inc_lb_zeros",
    ]
}

fn need_m(spec: &FixtureSpec) -> Result<Vec<Rat>, FixtureError> {
    spec.m
        .clone()
        .ok_or_else(|| FixtureError::BadParams(format!("{} needs M", spec.name)))
}

fn need_mna(spec: &FixtureSpec) -> Result<(Vec<Rat>, usize, usize), FixtureError> {
    let m = need_m(spec)?;
    let n = spec
        .n
        .ok_or_else(|| FixtureError::BadParams(format!("{} needs n", spec.name)))?;
    let alpha = spec
        .alpha
        .ok_or_else(|| FixtureError::BadParams(format!("{} needs alpha", spec.name)))?;
    Ok((m, n, alpha))
}

fn check_ratio(m: &[Rat], n: usize, alpha: usize, min_n: usize) -> Result<(), FixtureError> {
    if n < min_n {
        return Err(FixtureError::PreconditionViolated(format!(
            "n = {n} but the construction requires n >= {min_n}"
        )));
    }
    if alpha == 0 {
        return Err(FixtureError::PreconditionViolated("alpha must be positive".into()));
    }
    if alpha * (n - 1) > m.len() {
        return Err(FixtureError::PreconditionViolated(format!(
            "alpha = {alpha} exceeds |M|/(n-1) = {}/{}",
            m.len(),
            n - 1
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Shared layer builders
// ---------------------------------------------------------------------------

/// Biaffine layer reading a scalar input `x = 1`: output `i` is
/// `signs[i] * w[slot[i]]`.
fn wsb_scalar_fanout(signs_slots: &[(i64, usize)], params: usize, acts: Vec<PiecewiseFn>) -> Layer {
    let matrices = signs_slots
        .iter()
        .map(|&(sign, slot)| {
            let mut row = vec![Rat::zero(); params];
            row[slot] = Rat::from_int(sign);
            vec![row]
        })
        .collect();
    Layer {
        in_dim: 1,
        out_dim: signs_slots.len(),
        params,
        kind: LayerKind::WellStructuredBiaffine {
            matrices,
            constants: vec![Rat::zero(); signs_slots.len()],
        },
        activations: acts,
    }
}

/// Bias output layer computing `sum_i coeffs[i] * x_i + v`.
fn bias_sum_layer(coeffs: &[Rat]) -> Layer {
    let terms = coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| Term {
            coef: c.clone(),
            xs: vec![i],
            us: vec![],
        })
        .collect();
    Layer {
        in_dim: coeffs.len(),
        out_dim: 1,
        params: 1,
        kind: LayerKind::AffineWithBias {
            maps: vec![MultiPoly { terms }],
        },
        activations: vec![identity()],
    }
}

/// Continuous piecewise-linear function through `(points[i], values[i])`
/// with prescribed tail slopes; every breakpoint is owned by its right
/// piece. Each interior point must be a genuine kink.
fn pwl_right_owned(
    points: &[Rat],
    values: &[Rat],
    left_slope: &Rat,
    right_slope: &Rat,
) -> Result<PiecewiseFn, ScalarFunError> {
    assert!(!points.is_empty() && points.len() == values.len());
    let mut slopes = vec![left_slope.clone()];
    for i in 0..points.len() - 1 {
        slopes.push((&values[i + 1] - &values[i]) / (&points[i + 1] - &points[i]));
    }
    slopes.push(right_slope.clone());
    let mut pieces = Vec::new();
    for (i, s) in slopes.iter().enumerate() {
        let (lo, lo_closed) = if i == 0 {
            (Ext::NegInf, false)
        } else {
            (Ext::Fin(points[i - 1].clone()), true)
        };
        let (hi, hi_closed) = if i == slopes.len() - 1 {
            (Ext::PosInf, false)
        } else {
            (Ext::Fin(points[i].clone()), false)
        };
        let anchor = if i == 0 { 0 } else { i - 1 };
        let intercept = &values[anchor] - &(s * &points[anchor]);
        pieces.push(Piece::new(
            lo,
            lo_closed,
            hi,
            hi_closed,
            Poly::linear(intercept, s.clone()),
        ));
    }
    make_piecewise(pieces, BTreeMap::new())
}

// ---------------------------------------------------------------------------
// Intro fixtures
// ---------------------------------------------------------------------------

/// `a * ReLU(x) - a*rho * ReLU(-x)` with `a = 1`: the two-ReLU program,
/// rho = 1 for the identity, rho = 1/2 for the kinked variant. The output
/// layer's bias slot is pinned to zero so the free function is exactly the
/// scalar program.
fn intro_two_relu(rho: Rat, name: &str) -> Result<Fixture, FixtureError> {
    let l1 = wsb_scalar_fanout(&[(1, 0), (-1, 0)], 1, vec![relu(), relu()]);
    let l2 = bias_sum_layer(&[Rat::one(), -rho.clone()]);
    let network = Network::new(vec![l1, l2], vec![Rat::one()])?;
    let subject = Subject::with_pins(network, vec![None, Some(Rat::zero())])?;
    let answers = AnswerSheet {
        name: name.to_string(),
        affine_shift: if rho.is_one() { Some(Rat::zero()) } else { None },
        notes: vec![
            "output-layer bias frozen at 0; the free slot is the scalar input".into(),
        ],
        ..Default::default()
    };
    Ok(Fixture { subject, answers })
}

/// One kink pair per grid element plus an identity pass-through, combined
/// so the program is `x -> x + shift` while AD reports `lambda` at every
/// grid point.
fn intro_grid_adversary(m: &[Rat], lambda: &Rat) -> Result<Fixture, FixtureError> {
    if m.is_empty() {
        return Err(FixtureError::BadParams("adversary needs a non-empty grid".into()));
    }
    if lambda.is_one() {
        return Err(FixtureError::PreconditionViolated(
            "lambda must differ from 1".into(),
        ));
    }
    let msize = Rat::from_int(m.len() as i64);
    // Pair coefficient and pass-through coefficient solving
    //   pair_coef + passthrough/|M| = 1/|M|   (true slope one)
    //   (|M|-1) * pair_coef + passthrough = lambda  (AD at a grid point)
    let pair_coef = Rat::one() - lambda; // delta
    let passthrough = lambda * &msize - &msize + &Rat::one();
    // Layer 1: for each c in M the pair y = x - c, y = -x + c, then y = x.
    let mut matrices = Vec::new();
    let mut constants = Vec::new();
    let mut acts = Vec::new();
    for c in m {
        matrices.push(vec![vec![Rat::one()]]);
        constants.push(-c.clone());
        acts.push(relu());
        matrices.push(vec![vec![-Rat::one()]]);
        constants.push(c.clone());
        acts.push(relu());
    }
    matrices.push(vec![vec![Rat::one()]]);
    constants.push(Rat::zero());
    acts.push(identity());
    let n1 = acts.len();
    let l1 = Layer {
        in_dim: 1,
        out_dim: n1,
        params: 1,
        kind: LayerKind::WellStructuredBiaffine {
            matrices,
            constants,
        },
        activations: acts,
    };
    let mut coeffs = Vec::with_capacity(n1);
    for _ in m {
        coeffs.push(pair_coef.clone());
        coeffs.push(-pair_coef.clone());
    }
    coeffs.push(passthrough);
    let l2 = bias_sum_layer(&coeffs);
    let network = Network::new(vec![l1, l2], vec![Rat::one()])?;
    let subject = Subject::with_pins(network, vec![None, Some(Rat::zero())])?;
    let shift: Rat = -(&pair_coef * &m.iter().cloned().sum::<Rat>());
    let answers = AnswerSheet {
        name: "intro_grid_adversary".into(),
        grid: Some(m.to_vec()),
        affine_shift: Some(shift),
        notes: vec![format!(
            "AD reports {lambda} at every grid point; the true slope is 1/1"
        )],
        ..Default::default()
    };
    Ok(Fixture { subject, answers })
}

// ---------------------------------------------------------------------------
// Lower-bound fixture families
// ---------------------------------------------------------------------------

/// A positive piecewise-linear function with kinks exactly at `kinks`
/// (slopes 0, 1, .., alpha stepping up at each kink).
fn staircase_kinks(kinks: &[Rat]) -> Result<PiecewiseFn, ScalarFunError> {
    let mut values = vec![Rat::one()];
    for i in 1..kinks.len() {
        let step = (&kinks[i] - &kinks[i - 1]) * &Rat::from_int(i as i64);
        let v = values.last().unwrap() + &step;
        values.push(v);
    }
    let right = Rat::from_int(kinks.len() as i64);
    pwl_right_owned(kinks, &values, &Rat::zero(), &right)
}

fn first_alpha(m: &[Rat], alpha: usize) -> Vec<Rat> {
    m.iter().take(alpha).cloned().collect()
}

/// `z = v + sum_i h(w_i)` with every layer carrying bias parameters and
/// `h` kinked at `alpha` grid points.
fn thm3_bias_lb(m: &[Rat], n: usize, alpha: usize) -> Result<Fixture, FixtureError> {
    let kinks = first_alpha(m, alpha);
    let h = staircase_kinks(&kinks)?;
    let l1 = Layer {
        in_dim: 1,
        out_dim: n,
        params: n,
        kind: LayerKind::AffineWithBias {
            maps: vec![MultiPoly::zero(); n],
        },
        activations: vec![h; n],
    };
    let l2 = bias_sum_layer(&vec![Rat::one(); n]);
    let network = Network::new(vec![l1, l2], vec![Rat::zero()])?;
    let sum = Rat::from_int((n * alpha) as i64);
    Ok(Fixture {
        subject: Subject::unpinned(network),
        answers: AnswerSheet {
            name: "thm3_bias_lb".into(),
            grid: Some(m.to_vec()),
            lower_bound: Some(LowerBoundClaim {
                set: BoundSet::NonDiff,
                factor: Rat::new(1, 2),
                sum,
            }),
            ..Default::default()
        },
    })
}

/// `z = v + sum_i h(w_i)` with a biaffine first layer and a strictly
/// positive kinked `h` (so its zero set is empty).
fn thm7_ndf_lb_kinks(m: &[Rat], n: usize, alpha: usize) -> Result<Fixture, FixtureError> {
    let kinks = first_alpha(m, alpha);
    let h = staircase_kinks(&kinks)?;
    let slots: Vec<(i64, usize)> = (0..n).map(|i| (1, i)).collect();
    let l1 = wsb_scalar_fanout(&slots, n, vec![h; n]);
    let l2 = bias_sum_layer(&vec![Rat::one(); n]);
    let network = Network::new(vec![l1, l2], vec![Rat::one()])?;
    // Sum over neurons of |ndf ∪ bdz|: n kinked activations plus the
    // identity output whose zero set has boundary {0}.
    let sum = Rat::from_int((n * alpha + 1) as i64);
    Ok(Fixture {
        subject: Subject::unpinned(network),
        answers: AnswerSheet {
            name: "thm7_ndf_lb_kinks".into(),
            grid: Some(m.to_vec()),
            lower_bound: Some(LowerBoundClaim {
                set: BoundSet::NonDiff,
                factor: Rat::new(1, 9),
                sum,
            }),
            ..Default::default()
        },
    })
}

/// `z = v + sum_i ReLU(h(w_i) * s)` where `h` is analytic with transversal
/// zeros at `alpha` grid points and `s` is a shared scale parameter.
fn thm7_ndf_lb_zeros(m: &[Rat], n: usize, alpha: usize) -> Result<Fixture, FixtureError> {
    let zeros = first_alpha(m, alpha);
    let h = hermite_zero_slope1(&zeros)?;
    let slots: Vec<(i64, usize)> = (0..n).map(|i| (1, i)).collect();
    let l1 = wsb_scalar_fanout(&slots, n, vec![h; n]);
    // Layer 2: y_i = z_i * s with the shared parameter s.
    let matrices = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| vec![if i == j { Rat::one() } else { Rat::zero() }])
                .collect()
        })
        .collect();
    let l2 = Layer {
        in_dim: n,
        out_dim: n,
        params: 1,
        kind: LayerKind::WellStructuredBiaffine {
            matrices,
            constants: vec![Rat::zero(); n],
        },
        activations: vec![relu(); n],
    };
    let l3 = bias_sum_layer(&vec![Rat::one(); n]);
    let network = Network::new(vec![l1, l2, l3], vec![Rat::one()])?;
    // n analytic activations contribute alpha zero-boundary points each,
    // n ReLUs contribute one point each, plus the identity output's one.
    let sum = Rat::from_int((n * alpha + n + 1) as i64);
    Ok(Fixture {
        subject: Subject::unpinned(network),
        answers: AnswerSheet {
            name: "thm7_ndf_lb_zeros".into(),
            grid: Some(m.to_vec()),
            lower_bound: Some(LowerBoundClaim {
                set: BoundSet::NonDiff,
                factor: Rat::new(1, 9),
                sum,
            }),
            ..Default::default()
        },
    })
}

/// An even, strictly positive piecewise-linear function with exactly
/// `alpha` kinks: at `±q_j` for the first positive grid elements, plus the
/// origin when `alpha` is odd.
fn even_bump(m: &[Rat], alpha: usize) -> Result<PiecewiseFn, FixtureError> {
    let odd = alpha % 2 == 1;
    let radii: Vec<Rat> = m.iter().filter(|x| x.is_positive()).cloned().collect();
    let k = alpha / 2;
    if radii.len() < k {
        return Err(FixtureError::PreconditionViolated(format!(
            "need {k} positive grid elements for the even construction, found {}",
            radii.len()
        )));
    }
    if odd && !m.contains(&Rat::zero()) {
        return Err(FixtureError::PreconditionViolated(
            "odd alpha places a kink at 0, which must be a grid element".into(),
        ));
    }
    // h(x) = 1 + [odd] * |x| + sum_j ReLU(|x| - q_j)
    let qs: Vec<Rat> = radii.iter().take(k).cloned().collect();
    let mut points: Vec<Rat> = qs.iter().map(|q| -q).collect();
    points.reverse();
    if odd {
        points.push(Rat::zero());
    }
    points.extend(qs.iter().cloned());
    let h_at = |x: &Rat| {
        let ax = x.abs();
        let mut v = Rat::one();
        if odd {
            v += &ax;
        }
        for q in &qs {
            if &ax > q {
                v += &(&ax - q);
            }
        }
        v
    };
    let values: Vec<Rat> = points.iter().map(h_at).collect();
    let steep = Rat::from_int((k + usize::from(odd)) as i64);
    pwl_right_owned(&points, &values, &(-steep.clone()), &steep).map_err(Into::into)
}

/// `z = v + sum_i [h(w_i) - h(-w_i)]` for an even kinked `h`: the program
/// is the bias alone, but AD disagrees whenever some `w_i` hits a kink.
fn thm9_inc_lb_kinks(m: &[Rat], n: usize, alpha: usize) -> Result<Fixture, FixtureError> {
    let h = even_bump(m, alpha)?;
    let mut slots: Vec<(i64, usize)> = (0..n).map(|i| (1, i)).collect();
    slots.extend((0..n).map(|i| (-1, i)));
    let l1 = wsb_scalar_fanout(&slots, n, vec![h; 2 * n]);
    let mut coeffs = vec![Rat::one(); n];
    coeffs.extend(vec![-Rat::one(); n]);
    let l2 = bias_sum_layer(&coeffs);
    let network = Network::new(vec![l1, l2], vec![Rat::one()])?;
    let sum = Rat::from_int((2 * n * alpha + 1) as i64);
    Ok(Fixture {
        subject: Subject::unpinned(network),
        answers: AnswerSheet {
            name: "thm9_inc_lb_kinks".into(),
            grid: Some(m.to_vec()),
            lower_bound: Some(LowerBoundClaim {
                set: BoundSet::Incorrect,
                factor: Rat::new(1, 13),
                sum,
            }),
            ..Default::default()
        },
    })
}

/// `z = v + sum_i [ReLU(h(w_i)*s) - ReLU(-h(w_i)*s)]`: the paired ReLUs
/// cancel to an analytic program, but AD zeroes both branches whenever
/// `h(w_i) * s` lands on the kink.
fn thm9_inc_lb_zeros(m: &[Rat], n: usize, alpha: usize) -> Result<Fixture, FixtureError> {
    let zeros = first_alpha(m, alpha);
    let h = hermite_zero_slope1(&zeros)?;
    let slots: Vec<(i64, usize)> = (0..n).map(|i| (1, i)).collect();
    let l1 = wsb_scalar_fanout(&slots, n, vec![h; n]);
    let mut matrices: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(2 * n);
    for sign in [1i64, -1] {
        for i in 0..n {
            matrices.push(
                (0..n)
                    .map(|j| {
                        vec![if i == j {
                            Rat::from_int(sign)
                        } else {
                            Rat::zero()
                        }]
                    })
                    .collect(),
            );
        }
    }
    let l2 = Layer {
        in_dim: n,
        out_dim: 2 * n,
        params: 1,
        kind: LayerKind::WellStructuredBiaffine {
            matrices,
            constants: vec![Rat::zero(); 2 * n],
        },
        activations: vec![relu(); 2 * n],
    };
    let mut coeffs = vec![Rat::one(); n];
    coeffs.extend(vec![-Rat::one(); n]);
    let l3 = bias_sum_layer(&coeffs);
    let network = Network::new(vec![l1, l2, l3], vec![Rat::one()])?;
    let sum = Rat::from_int((n * alpha + 2 * n + 1) as i64);
    Ok(Fixture {
        subject: Subject::unpinned(network),
        answers: AnswerSheet {
            name: "thm9_inc_lb_zeros".into(),
            grid: Some(m.to_vec()),
            lower_bound: Some(LowerBoundClaim {
                set: BoundSet::Incorrect,
                factor: Rat::new(1, 13),
                sum,
            }),
            ..Default::default()
        },
    })
}
