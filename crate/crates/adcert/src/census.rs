//! Exhaustive censuses over finite parameter grids.
//!
//! A scan classifies every point of `M^F` (the grid to the power of the
//! free parameter count), tallies the non-differentiable and incorrect
//! sets, and checks the tallies against the applicable density bounds:
//!
//! * all layers with bias: `|ND| / |Omega| <= (1/|M|) * sum |ndf|`, and the
//!   incorrect set is empty;
//! * every layer bias-or-biaffine: `|ND ∪ inc| / |Omega|` is bounded with
//!   `ndf ∪ (bdz ∩ S_{l+1})` per neuron, and `|inc| / |Omega|` with
//!   `(ndf ∩ S_l) ∪ (bdz ∩ S_{l+1})`, where `S_l` is empty for layers with
//!   bias (and past the output) and the whole line otherwise;
//! * fixture answer sheets add achievability checks: the tallies must reach
//!   a stated fraction of the bound.
//!
//! Points are enumerated in a fixed order (first free coordinate fastest),
//! so reports and logs are reproducible byte for byte.

use crate::certify::{classify_at, Certificate, Verdict};
use crate::network::fixtures::{BoundSet, LowerBoundClaim};
use crate::network::{STag, Subject};
use crate::oracle::OracleBudget;
use crate::rat::Rat;
use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, thiserror::Error)]
pub enum CensusError {
    #[error("grid of {points} points exceeds the cap of {cap}")]
    GridTooLarge { points: u128, cap: u128 },
    #[error("grid must hold at least one element, all distinct")]
    BadGrid,
    #[error("report has {0} unknown points; rerun with unknowns allowed or a larger budget")]
    IncompleteReport(u128),
    #[error("no density bound applies: {0}")]
    NotApplicable(String),
}

/// A finite ascending grid of distinct rationals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid(Vec<Rat>);

impl Grid {
    pub fn new(mut m: Vec<Rat>) -> Result<Self, CensusError> {
        if m.is_empty() {
            return Err(CensusError::BadGrid);
        }
        m.sort();
        let len = m.len();
        m.dedup();
        if m.len() != len {
            return Err(CensusError::BadGrid);
        }
        Ok(Grid(m))
    }

    pub fn elements(&self) -> &[Rat] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point_count(&self, free: usize) -> u128 {
        (self.0.len() as u128).saturating_pow(free as u32)
    }
}

pub const DEFAULT_POINT_CAP: u128 = 10_000_000;

#[derive(Clone, Debug)]
pub struct ScanOptions {
    pub budget: OracleBudget,
    pub point_cap: u128,
    pub log_points: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl ScanOptions {
    pub fn for_subject(subject: &Subject) -> Self {
        ScanOptions {
            budget: OracleBudget::for_width(subject.free_count()),
            point_cap: DEFAULT_POINT_CAP,
            log_points: false,
            jobs: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PointRecord {
    pub w: Vec<Rat>,
    pub verdict: Verdict,
    pub certificate: Certificate,
    pub witness: Option<(usize, usize)>,
}

/// The three upper bounds, where applicable.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundValues {
    pub bias_ndf: Option<Rat>,
    pub general_union: Option<Rat>,
    pub incorrect: Option<Rat>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusReport {
    pub grid: Vec<Rat>,
    pub free_params: usize,
    pub total_points: u128,
    pub nd_count: u128,
    pub inc_count: u128,
    pub unknown_count: u128,
    pub nd_density: Rat,
    pub inc_density: Rat,
    pub bounds: BoundValues,
    pub lower_bound: Option<LowerBoundClaim>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log: Option<Vec<PointRecord>>,
}

fn density(count: u128, total: u128) -> Rat {
    Rat::from_big(BigRational::new(BigInt::from(count), BigInt::from(total)))
}

/// Upper bounds for this subject and grid. A bound is reported only when
/// its structural precondition holds (pinned slots on a biaffine layer
/// disqualify the layer from both classes).
pub fn bounds(subject: &Subject, grid: &Grid) -> Result<BoundValues, CensusError> {
    let net = &subject.network;
    let msize = Rat::from_int(grid.len() as i64);
    let depth = net.depth();
    // Restricted per-layer classification.
    let layer_bias: Vec<bool> = (0..depth).map(|l| subject.layer_has_bias(l)).collect();
    let layer_wsb: Vec<bool> = (0..depth)
        .map(|l| !net.layers()[l].has_bias() && !subject.layer_pinned(l))
        .collect();
    let all_bias = layer_bias.iter().all(|&b| b);
    let all_classified = (0..depth).all(|l| layer_bias[l] || layer_wsb[l]);

    let mut out = BoundValues::default();
    if all_bias {
        let mut sum = 0usize;
        for layer in net.layers() {
            for act in &layer.activations {
                sum += act.breakpoints().ndf_len();
            }
        }
        out.bias_ndf = Some(&Rat::from_int(sum as i64) / &msize);
    }
    if all_classified {
        // S_l for l in 1..=L+1 over the restricted structure.
        let s: Vec<STag> = (0..=depth)
            .map(|l| {
                if l == depth || layer_bias[l] {
                    STag::Empty
                } else {
                    STag::Full
                }
            })
            .collect();
        let mut union_sum = 0usize;
        let mut inc_sum = 0usize;
        for (l, layer) in net.layers().iter().enumerate() {
            let s_here = s[l];
            let s_next = s[l + 1];
            for act in &layer.activations {
                let b = act.breakpoints();
                union_sum += match s_next {
                    STag::Empty => b.ndf_len(),
                    STag::Full => b.ndf_union_bdz_len(),
                };
                inc_sum += match (s_here, s_next) {
                    (STag::Empty, STag::Empty) => 0,
                    (STag::Empty, STag::Full) => b.bdz_len(),
                    (STag::Full, STag::Empty) => b.ndf_len(),
                    (STag::Full, STag::Full) => b.ndf_union_bdz_len(),
                };
            }
        }
        out.general_union = Some(&Rat::from_int(union_sum as i64) / &msize);
        out.incorrect = Some(&Rat::from_int(inc_sum as i64) / &msize);
    }
    if out.bias_ndf.is_none() && out.general_union.is_none() {
        return Err(CensusError::NotApplicable(
            "some layer is neither affine-with-bias nor unpinned biaffine".into(),
        ));
    }
    Ok(out)
}

/// Enumeration layout: the free slots of the output layer vary fastest so
/// the forward pass below the output layer is shared across the innermost
/// block. Points are visited in a fixed order either way.
struct ScanLayout {
    /// Free-coordinate positions of the output layer's free slots.
    tail_positions: Vec<usize>,
    /// Remaining free-coordinate positions (slower digits).
    head_positions: Vec<usize>,
    tail_count: u128,
}

impl ScanLayout {
    fn new(subject: &Subject, grid_len: usize) -> Self {
        let net = &subject.network;
        let last = net.depth() - 1;
        let last_offset = net.param_offset(last);
        let free_slots = subject.free_slots();
        let mut tail_positions = Vec::new();
        let mut head_positions = Vec::new();
        for (pos, &slot) in free_slots.iter().enumerate() {
            if slot >= last_offset {
                tail_positions.push(pos);
            } else {
                head_positions.push(pos);
            }
        }
        let tail_count = (grid_len as u128).saturating_pow(tail_positions.len() as u32);
        ScanLayout {
            tail_positions,
            head_positions,
            tail_count,
        }
    }

    /// Decode a point index (tail digits fastest) into a free vector.
    fn point(&self, index: u128, m: &[Rat], out: &mut [Rat]) {
        let base = m.len() as u128;
        let mut idx = index;
        for &pos in self.tail_positions.iter().chain(&self.head_positions) {
            out[pos] = m[(idx % base) as usize].clone();
            idx /= base;
        }
    }
}

struct Tally {
    nd: u128,
    inc: u128,
    unknown: u128,
    log: Vec<PointRecord>,
}

impl Tally {
    fn empty() -> Self {
        Tally {
            nd: 0,
            inc: 0,
            unknown: 0,
            log: Vec::new(),
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.nd += other.nd;
        self.inc += other.inc;
        self.unknown += other.unknown;
        self.log.extend(other.log);
        self
    }
}

fn record(
    t: &mut Tally,
    w: Vec<Rat>,
    verdict: Verdict,
    certificate: Certificate,
    witness: Option<(usize, usize)>,
    log: bool,
) {
    match verdict {
        Verdict::NonDiffClarke | Verdict::NonDiffNotClarke => t.nd += 1,
        Verdict::DiffIncorrect => t.inc += 1,
        Verdict::Unknown => t.unknown += 1,
        Verdict::DiffCorrect => {}
    }
    if log {
        t.log.push(PointRecord {
            w,
            verdict,
            certificate,
            witness,
        });
    }
}

/// Process one shared forward prefix: the output layer's free parameters
/// run through all their grid values while the layers below are evaluated
/// once.
#[allow(clippy::too_many_arguments)]
fn scan_head(
    subject: &Subject,
    m: &[Rat],
    layout: &ScanLayout,
    head: u128,
    w_free: &mut [Rat],
    clean_cert: Certificate,
    opts: &ScanOptions,
    t: &mut Tally,
) {
    let net = &subject.network;
    let depth = net.depth();
    let base = m.len() as u128;
    let mut idx = head;
    for &pos in &layout.head_positions {
        w_free[pos] = m[(idx % base) as usize].clone();
        idx /= base;
    }
    // The tail slots feed only the output layer; their current values do
    // not affect the prefix trace.
    let mut w_full = subject.embed(w_free).expect("grid coordinates");
    let free_slots = subject.free_slots();
    let mut prefix_y: Vec<Vec<Rat>> = Vec::with_capacity(depth - 1);
    let mut prefix_z: Vec<Vec<Rat>> = Vec::with_capacity(depth - 1);
    let mut x: &[Rat] = net.input();
    let mut offset = 0;
    let mut prefix_touched = false;
    for layer in &net.layers()[..depth - 1] {
        let wl = &w_full[offset..offset + layer.params];
        offset += layer.params;
        let yl: Vec<Rat> = (0..layer.out_dim)
            .map(|i| layer.pre_activation(i, x, wl))
            .collect();
        let zl: Vec<Rat> = yl
            .iter()
            .zip(&layer.activations)
            .map(|(v, act)| act.eval(v))
            .collect();
        for (i, act) in layer.activations.iter().enumerate() {
            let bp = act.breakpoints();
            if !bp.ndf.is_empty() && bp.ndf.contains(&yl[i]) {
                prefix_touched = true;
            }
        }
        prefix_y.push(yl);
        prefix_z.push(zl);
        x = prefix_z.last().unwrap();
    }
    let last = &net.layers()[depth - 1];
    let last_offset = net.param_offset(depth - 1);
    for tail_idx in 0..layout.tail_count {
        let mut idx = tail_idx;
        for &pos in &layout.tail_positions {
            let v = m[(idx % base) as usize].clone();
            w_full[free_slots[pos]] = v.clone();
            w_free[pos] = v;
            idx /= base;
        }
        let wl = &w_full[last_offset..last_offset + last.params];
        let xin: &[Rat] = if depth == 1 { net.input() } else { x };
        let yl: Vec<Rat> = (0..last.out_dim)
            .map(|i| last.pre_activation(i, xin, wl))
            .collect();
        let mut touched = prefix_touched;
        if !touched {
            for (i, act) in last.activations.iter().enumerate() {
                let bp = act.breakpoints();
                if !bp.ndf.is_empty() && bp.ndf.contains(&yl[i]) {
                    touched = true;
                    break;
                }
            }
        }
        if !touched {
            record(
                t,
                w_free.to_vec(),
                Verdict::DiffCorrect,
                clean_cert,
                None,
                opts.log_points,
            );
            continue;
        }
        let zl: Vec<Rat> = yl
            .iter()
            .zip(&last.activations)
            .map(|(v, act)| act.eval(v))
            .collect();
        let mut y = prefix_y.clone();
        let mut z = prefix_z.clone();
        y.push(yl);
        z.push(zl);
        let c = classify_at(
            subject,
            w_full.clone(),
            crate::network::ForwardTrace { y, z },
            &opts.budget,
        );
        record(
            t,
            w_free.to_vec(),
            c.verdict,
            c.certificate,
            c.witness,
            opts.log_points,
        );
    }
}

/// Classify one grid point, with a fast path for the common case that no
/// pre-activation touches a kink (then AD is the exact derivative and no
/// jacobian needs to be materialized).
fn classify_point(
    subject: &Subject,
    w_free: &[Rat],
    clean_cert: Certificate,
    budget: &OracleBudget,
) -> (Verdict, Certificate, Option<(usize, usize)>) {
    let w = subject.embed(w_free).expect("grid coordinates");
    let trace = subject
        .network
        .forward(&w)
        .expect("parameter count matches");
    let mut touched = false;
    'outer: for (l, layer) in subject.network.layers().iter().enumerate() {
        for i in 0..layer.out_dim {
            let bp = layer.activations[i].breakpoints();
            if !bp.ndf.is_empty() && bp.ndf.contains(&trace.y[l][i]) {
                touched = true;
                break 'outer;
            }
        }
    }
    if !touched {
        return (Verdict::DiffCorrect, clean_cert, None);
    }
    let c = classify_at(subject, w, trace, budget);
    (c.verdict, c.certificate, c.witness)
}

/// Exhaustively classify every point of `grid^free`.
pub fn scan(
    subject: &Subject,
    grid: &Grid,
    opts: &ScanOptions,
    lower_bound: Option<LowerBoundClaim>,
) -> Result<CensusReport, CensusError> {
    let free = subject.free_count();
    let total = grid.point_count(free);
    if total > opts.point_cap {
        return Err(CensusError::GridTooLarge {
            points: total,
            cap: opts.point_cap,
        });
    }
    let m = grid.elements();
    let clean_cert = if subject.has_bias() {
        Certificate::ThmBiasEquivalence
    } else {
        Certificate::SuffStd
    };
    let layout = ScanLayout::new(subject, m.len());
    let prefix_mode =
        subject.network.depth() > 1 && layout.tail_count >= 2 && layout.tail_count <= 65_536;
    let run = || {
        if prefix_mode {
            let tail = layout.tail_count;
            let heads = total / tail;
            let heads_per_chunk = (4096 / tail).max(1);
            let chunks: Vec<u128> = (0..heads.div_ceil(heads_per_chunk)).collect();
            chunks
                .into_par_iter()
                .map(|c| {
                    let lo = c * heads_per_chunk;
                    let hi = (lo + heads_per_chunk).min(heads);
                    let mut t = Tally::empty();
                    let mut w_free = vec![Rat::zero(); free];
                    for head in lo..hi {
                        scan_head(
                            subject,
                            m,
                            &layout,
                            head,
                            &mut w_free,
                            clean_cert,
                            opts,
                            &mut t,
                        );
                    }
                    t
                })
                .reduce(Tally::empty, Tally::merge)
        } else {
            let chunk: u128 = 4096;
            let chunks: Vec<u128> = (0..total.div_ceil(chunk)).collect();
            chunks
                .into_par_iter()
                .map(|c| {
                    let lo = c * chunk;
                    let hi = (lo + chunk).min(total);
                    let mut t = Tally::empty();
                    for index in lo..hi {
                        let mut w = vec![Rat::zero(); free];
                        layout.point(index, m, &mut w);
                        let (verdict, certificate, witness) =
                            classify_point(subject, &w, clean_cert, &opts.budget);
                        record(&mut t, w, verdict, certificate, witness, opts.log_points);
                    }
                    t
                })
                .reduce(Tally::empty, Tally::merge)
        }
    };
    let tally = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .expect("thread pool")
            .install(run),
        None => run(),
    };
    let bound_values = bounds(subject, grid).unwrap_or_default();
    Ok(CensusReport {
        grid: m.to_vec(),
        free_params: free,
        total_points: total,
        nd_count: tally.nd,
        inc_count: tally.inc,
        unknown_count: tally.unknown,
        nd_density: density(tally.nd, total),
        inc_density: density(tally.inc, total),
        bounds: bound_values,
        lower_bound,
        seed: opts.budget.seed,
        log: opts.log_points.then_some(tally.log),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyLine {
    pub label: String,
    pub detail: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOutcome {
    pub pass: bool,
    pub lines: Vec<VerifyLine>,
}

/// Check every applicable bound against the tallies.
pub fn verify(report: &CensusReport, allow_unknown: bool) -> Result<VerifyOutcome, CensusError> {
    if report.unknown_count > 0 && !allow_unknown {
        return Err(CensusError::IncompleteReport(report.unknown_count));
    }
    let mut lines = Vec::new();
    let mut push = |label: &str, detail: String, pass: bool| {
        lines.push(VerifyLine {
            label: label.to_string(),
            detail,
            pass,
        });
    };
    let msize = Rat::from_int(report.grid.len() as i64);
    if let Some(bound) = &report.bounds.bias_ndf {
        let ok = report.nd_density <= *bound;
        push(
            "bias_ndf_upper",
            format!("|ND|/|Omega| = {} <= {}", report.nd_density, bound),
            ok,
        );
        let ok = report.inc_count == 0;
        push(
            "bias_incorrect_empty",
            format!("|inc| = {}", report.inc_count),
            ok,
        );
    }
    if let Some(bound) = &report.bounds.general_union {
        let union = density(report.nd_count + report.inc_count, report.total_points);
        let ok = union <= *bound;
        push(
            "general_union_upper",
            format!("|ND ∪ inc|/|Omega| = {} <= {}", union, bound),
            ok,
        );
    }
    if let Some(bound) = &report.bounds.incorrect {
        let ok = report.inc_density <= *bound;
        push(
            "incorrect_upper",
            format!("|inc|/|Omega| = {} <= {}", report.inc_density, bound),
            ok,
        );
    }
    if let Some(claim) = &report.lower_bound {
        let rhs = &claim.factor * &(&claim.sum / &msize);
        let (name, lhs) = match claim.set {
            BoundSet::NonDiff => ("nd_lower", report.nd_density.clone()),
            BoundSet::Incorrect => ("inc_lower", report.inc_density.clone()),
        };
        let ok = lhs >= rhs;
        push(name, format!("{} >= {}", lhs, rhs), ok);
    }
    if report.unknown_count > 0 {
        push(
            "unknown_points",
            format!("{} unknown points excluded from tallies", report.unknown_count),
            false,
        );
    }
    let pass = lines.iter().all(|l| l.pass);
    Ok(VerifyOutcome { pass, lines })
}

/// Write the report as CSV: optional per-point rows, then a summary block.
pub fn write_csv<W: Write>(
    report: &CensusReport,
    outcome: Option<&VerifyOutcome>,
    decimal: bool,
    mut out: W,
) -> std::io::Result<()> {
    if let Some(log) = &report.log {
        let mut header: Vec<String> = (1..=report.free_params)
            .map(|i| format!("w{i}"))
            .collect();
        if decimal {
            header.extend((1..=report.free_params).map(|i| format!("w{i}_dec")));
        }
        header.extend(["verdict".into(), "certificate".into(), "witness".into()]);
        writeln!(out, "{}", header.join(","))?;
        for rec in log {
            let mut fields: Vec<String> = rec.w.iter().map(|r| r.to_string()).collect();
            if decimal {
                fields.extend(rec.w.iter().map(|r| format!("{}", r.to_f64())));
            }
            fields.push(rec.verdict.as_str().into());
            fields.push(rec.certificate.as_str().into());
            fields.push(match rec.witness {
                Some((l, i)) => format!("{}:{}", l + 1, i + 1),
                None => String::new(),
            });
            writeln!(out, "{}", fields.join(","))?;
        }
    }
    writeln!(out, "# summary")?;
    writeln!(out, "# grid_size,{}", report.grid.len())?;
    writeln!(out, "# free_params,{}", report.free_params)?;
    writeln!(out, "# points,{}", report.total_points)?;
    writeln!(out, "# nd_count,{}", report.nd_count)?;
    writeln!(out, "# inc_count,{}", report.inc_count)?;
    writeln!(out, "# unknown_count,{}", report.unknown_count)?;
    writeln!(out, "# nd_density,{}", report.nd_density)?;
    writeln!(out, "# inc_density,{}", report.inc_density)?;
    let fmt = |b: &Option<Rat>| b.as_ref().map_or("n/a".into(), |r| r.to_string());
    writeln!(out, "# bound_bias_ndf,{}", fmt(&report.bounds.bias_ndf))?;
    writeln!(out, "# bound_general_union,{}", fmt(&report.bounds.general_union))?;
    writeln!(out, "# bound_incorrect,{}", fmt(&report.bounds.incorrect))?;
    writeln!(out, "# seed,{}", report.seed)?;
    if let Some(outcome) = outcome {
        for line in &outcome.lines {
            writeln!(
                out,
                "# check,{},{},{}",
                line.label,
                if line.pass { "pass" } else { "fail" },
                line.detail
            )?;
        }
        writeln!(out, "# verify,{}", if outcome.pass { "pass" } else { "fail" })?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::{fixture, FixtureSpec};
    use crate::network::{Layer, LayerKind, MultiPoly, Network, Subject, Term};
    use crate::rat::rat;
    use crate::scalarfun::relu;

    /// `z = ReLU(w1 + w2)`: affine-with-bias, one ReLU.
    fn relu_sum_subject() -> Subject {
        let net = Network::new(
            vec![Layer {
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
                activations: vec![relu()],
            }],
            vec![rat(1, 1)],
        )
        .unwrap();
        Subject::unpinned(net)
    }

    #[test]
    fn relu_sum_census_is_tight() {
        let s = relu_sum_subject();
        let grid = Grid::new(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]).unwrap();
        let opts = ScanOptions::for_subject(&s);
        let report = scan(&s, &grid, &opts, None).unwrap();
        assert_eq!(report.total_points, 9);
        assert_eq!(report.nd_count, 3); // w1 + w2 = 0
        assert_eq!(report.inc_count, 0);
        assert_eq!(report.nd_density, rat(1, 3));
        assert_eq!(report.bounds.bias_ndf, Some(rat(1, 3)));
        let outcome = verify(&report, false).unwrap();
        assert!(outcome.pass);
    }

    #[test]
    fn adversary_census_all_incorrect() {
        let m = vec![rat(-1, 1), rat(0, 1), rat(1, 1)];
        let f = fixture(&FixtureSpec {
            name: "intro_grid_adversary".into(),
            m: Some(m.clone()),
            n: None,
            alpha: None,
            lambda: Some(rat(7, 1)),
        })
        .unwrap();
        let grid = Grid::new(m).unwrap();
        let opts = ScanOptions::for_subject(&f.subject);
        let report = scan(&f.subject, &grid, &opts, None).unwrap();
        assert_eq!(report.total_points, 3);
        assert_eq!(report.inc_count, 3);
        assert_eq!(report.nd_count, 0);
        assert_eq!(report.unknown_count, 0);
    }

    #[test]
    fn grid_too_large_rejected() {
        let s = relu_sum_subject();
        let grid = Grid::new((0..200).map(|i| rat(i, 1)).collect()).unwrap();
        let mut opts = ScanOptions::for_subject(&s);
        opts.point_cap = 100;
        assert!(matches!(
            scan(&s, &grid, &opts, None),
            Err(CensusError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn bounds_for_mixed_net() {
        // Layer 1 biaffine with n=2 ReLU neurons, layer 2 bias:
        // S_1 full, S_2 empty; general union = 2/|M|, incorrect = 2/|M|.
        let m = crate::network::fixtures::parse_grid_param("16eq").unwrap();
        let f = fixture(&FixtureSpec {
            name: "thm7_ndf_lb_kinks".into(),
            m: Some(m.clone()),
            n: Some(4),
            alpha: Some(1),
            lambda: None,
        })
        .unwrap();
        let grid = Grid::new(m).unwrap();
        let b = bounds(&f.subject, &grid).unwrap();
        assert!(b.bias_ndf.is_none());
        // 4 kinked neurons (S_2 empty so bdz does not enter), output layer
        // identity contributes 0.
        assert_eq!(b.general_union, Some(rat(4, 16)));
        // S_1 full: ndf enters for layer 1; output neuron has ndf empty.
        assert_eq!(b.incorrect, Some(rat(4, 16)));
    }

    #[test]
    fn prefix_scan_matches_per_point_classification() {
        // A mixed fixture small enough to cross-check the shared-prefix
        // enumeration against independent per-point classification.
        let m = crate::network::fixtures::parse_grid_param("4eq").unwrap();
        let f = fixture(&FixtureSpec {
            name: "thm9_inc_lb_kinks".into(),
            m: Some(m.clone()),
            n: Some(4),
            alpha: Some(1),
            lambda: None,
        })
        .unwrap();
        let grid = Grid::new(m.clone()).unwrap();
        let mut opts = ScanOptions::for_subject(&f.subject);
        opts.log_points = true;
        let report = scan(&f.subject, &grid, &opts, None).unwrap();
        assert_eq!(report.total_points, 4u128.pow(5));
        let mut nd = 0;
        let mut inc = 0;
        for rec in report.log.as_ref().unwrap() {
            let c = crate::certify::classify(&f.subject, &rec.w, &opts.budget);
            assert_eq!(c.verdict, rec.verdict, "at {:?}", rec.w);
            match c.verdict {
                Verdict::NonDiffClarke | Verdict::NonDiffNotClarke => nd += 1,
                Verdict::DiffIncorrect => inc += 1,
                _ => {}
            }
        }
        assert_eq!(nd, report.nd_count);
        assert_eq!(inc, report.inc_count);
        // Independent count for this construction: the program equals its
        // bias parameter, so a point is incorrect exactly when some of the
        // first n coordinates hits a kink of the even bump (here only 0).
        let expected_inc: u128 = (0..4u128.pow(5))
            .filter(|&p| {
                let mut idx = p;
                // tail digit first (the bias), then the head coordinates
                let _bias = idx % 4;
                idx /= 4;
                (0..4).any(|_| {
                    let d = idx % 4;
                    idx /= 4;
                    m[d as usize].is_zero()
                })
            })
            .count() as u128;
        assert_eq!(report.inc_count, expected_inc);
        assert_eq!(report.nd_count, 0);
    }

    #[test]
    fn verify_fails_on_unmet_lower_bound() {
        use crate::network::fixtures::{BoundSet, LowerBoundClaim};
        let s = relu_sum_subject();
        let grid = Grid::new(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]).unwrap();
        let opts = ScanOptions::for_subject(&s);
        let claim = LowerBoundClaim {
            set: BoundSet::NonDiff,
            factor: rat(10, 1),
            sum: rat(1, 1),
        };
        let report = scan(&s, &grid, &opts, Some(claim)).unwrap();
        let outcome = verify(&report, false).unwrap();
        assert!(!outcome.pass);
        assert!(outcome
            .lines
            .iter()
            .any(|l| l.label == "nd_lower" && !l.pass));
    }

    #[test]
    fn csv_roundtrip_shape() {
        let s = relu_sum_subject();
        let grid = Grid::new(vec![rat(-1, 1), rat(0, 1), rat(1, 1)]).unwrap();
        let mut opts = ScanOptions::for_subject(&s);
        opts.log_points = true;
        let report = scan(&s, &grid, &opts, None).unwrap();
        let outcome = verify(&report, false).unwrap();
        let mut buf = Vec::new();
        write_csv(&report, Some(&outcome), false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("w1,w2,verdict"));
        assert!(text.contains("# verify,pass"));
        assert_eq!(text.matches("NonDiffClarke").count(), 3);
        // Deterministic output.
        let mut buf2 = Vec::new();
        let report2 = scan(&s, &grid, &opts, None).unwrap();
        write_csv(&report2, Some(&verify(&report2, false).unwrap()), false, &mut buf2).unwrap();
        assert_eq!(text, String::from_utf8(buf2).unwrap());
    }
}
