//! Continuous piecewise-polynomial scalar functions and their extended
//! derivatives.
//!
//! A `PiecewiseFn` is an ordered list of interval/polynomial pieces that
//! partition the real line, plus an optional per-breakpoint derivative
//! override. Breakpoint ownership (which piece's interval contains a shared
//! endpoint) encodes the derivative an AD engine uses there; an override
//! models engines that return some other constant.
//!
//! Three finite point sets drive everything downstream: `ndf` (points where
//! the function is not differentiable), `bdz` (the boundary of its zero
//! set), and `ncdf` (points where it is not continuously differentiable;
//! equal to `ndf` for polynomial pieces).

use crate::poly::{Ext, Poly};
use crate::rat::Rat;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScalarFunError {
    #[error("piece intervals do not partition the real line")]
    GapOrOverlap,
    #[error("pieces disagree in value at {0}")]
    Discontinuous(Rat),
    #[error("derivative override at {0} requires a non-differentiable point there")]
    InvalidOverride(Rat),
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// One analytic piece: a polynomial on an interval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: Ext,
    pub hi: Ext,
    pub lo_closed: bool,
    pub hi_closed: bool,
    pub poly: Poly,
}

impl Piece {
    pub fn new(lo: Ext, lo_closed: bool, hi: Ext, hi_closed: bool, poly: Poly) -> Self {
        Piece {
            lo,
            hi,
            lo_closed,
            hi_closed,
            poly,
        }
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: &Rat) -> bool {
        let above = match &self.lo {
            Ext::NegInf => true,
            Ext::Fin(l) => x > l || (self.lo_closed && x == l),
            Ext::PosInf => false,
        };
        let below = match &self.hi {
            Ext::NegInf => false,
            Ext::Fin(h) => x < h || (self.hi_closed && x == h),
            Ext::PosInf => true,
        };
        above && below
    }

    pub fn closure_contains(&self, x: &Rat) -> bool {
        let above = match &self.lo {
            Ext::NegInf => true,
            Ext::Fin(l) => x >= l,
            Ext::PosInf => false,
        };
        let below = match &self.hi {
            Ext::NegInf => false,
            Ext::Fin(h) => x <= h,
            Ext::PosInf => true,
        };
        above && below
    }

    fn well_formed(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Ext::NegInf, _) if self.lo_closed => false,
            (_, Ext::PosInf) if self.hi_closed => false,
            (Ext::NegInf, Ext::NegInf) | (Ext::PosInf, _) | (_, Ext::NegInf) => false,
            (Ext::NegInf, _) | (_, Ext::PosInf) => true,
            (Ext::Fin(a), Ext::Fin(b)) => a < b || (a == b && self.lo_closed && self.hi_closed),
        }
    }
}

/// The finite breakpoint sets of a piecewise function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BreakpointSets {
    /// Non-differentiable points.
    pub ndf: BTreeSet<Rat>,
    /// Rational members of the boundary of the zero set.
    pub bdz: BTreeSet<Rat>,
    /// Zero-set boundary points that are provably irrational (counted but
    /// not representable here); always 0 for the catalog functions.
    pub bdz_extra: usize,
    /// Points where the function is not continuously differentiable.
    pub ncdf: BTreeSet<Rat>,
}

impl BreakpointSets {
    pub fn ndf_len(&self) -> usize {
        self.ndf.len()
    }

    pub fn bdz_len(&self) -> usize {
        self.bdz.len() + self.bdz_extra
    }

    /// `|ndf ∪ bdz|`. Exact: irrational boundary points can never collide
    /// with the (rational) non-differentiability points.
    pub fn ndf_union_bdz_len(&self) -> usize {
        self.ndf.union(&self.bdz).count() + self.bdz_extra
    }
}

/// A continuous piecewise-polynomial function with an extended-derivative
/// policy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PiecewiseFn {
    pieces: Vec<Piece>,
    /// Per-breakpoint constant derivative overrides (keys must be in `ndf`).
    overrides: BTreeMap<Rat, Rat>,
    #[serde(skip)]
    breakpoints: BreakpointSets,
    /// Distinct finite piece-boundary abscissas, ascending.
    #[serde(skip)]
    boundaries: Vec<Rat>,
    /// Derivative polynomial per piece (cached; hot in AD sweeps).
    #[serde(skip)]
    dpolys: Vec<Poly>,
    /// One-sided derivative limits `(left, right)` per boundary.
    #[serde(skip)]
    boundary_slopes: Vec<(Rat, Rat)>,
    /// Extended-derivative value per boundary (override-aware).
    #[serde(skip)]
    adf_at_boundary: Vec<Rat>,
}

/// Builds a validated `PiecewiseFn`.
pub fn make_piecewise(
    pieces: Vec<Piece>,
    overrides: BTreeMap<Rat, Rat>,
) -> Result<PiecewiseFn, ScalarFunError> {
    let mut pieces = pieces;
    if pieces.is_empty() || pieces.iter().any(|p| !p.well_formed()) {
        return Err(ScalarFunError::GapOrOverlap);
    }
    pieces.sort_by(|a, b| (&a.lo, !a.lo_closed).cmp(&(&b.lo, !b.lo_closed)));
    if pieces.first().unwrap().lo != Ext::NegInf || pieces.last().unwrap().hi != Ext::PosInf {
        return Err(ScalarFunError::GapOrOverlap);
    }
    for w in pieces.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        match (&a.hi, &b.lo) {
            (Ext::Fin(x), Ext::Fin(y)) if x == y => {
                // Exactly one side owns the shared endpoint.
                if a.hi_closed == b.lo_closed {
                    return Err(ScalarFunError::GapOrOverlap);
                }
            }
            _ => return Err(ScalarFunError::GapOrOverlap),
        }
    }

    let mut boundaries: Vec<Rat> = Vec::new();
    for p in &pieces {
        for e in [&p.lo, &p.hi] {
            if let Ext::Fin(b) = e {
                if boundaries.last() != Some(b) {
                    boundaries.push(b.clone());
                }
            }
        }
    }
    boundaries.dedup();

    // Continuity: every piece incident to a boundary must agree in value.
    for b in &boundaries {
        let mut value: Option<Rat> = None;
        for p in &pieces {
            if p.closure_contains(b) {
                let v = p.poly.eval(b);
                match &value {
                    None => value = Some(v),
                    Some(prev) if *prev != v => {
                        return Err(ScalarFunError::Discontinuous(b.clone()))
                    }
                    _ => {}
                }
            }
        }
    }

    let breakpoints = compute_breakpoints(&pieces, &boundaries);
    for key in overrides.keys() {
        if !breakpoints.ndf.contains(key) {
            return Err(ScalarFunError::InvalidOverride(key.clone()));
        }
    }

    let dpolys: Vec<Poly> = pieces.iter().map(|p| p.poly.derivative()).collect();
    let boundary_slopes: Vec<(Rat, Rat)> = boundaries
        .iter()
        .map(|b| neighbor_slopes(&pieces, b))
        .collect();
    let adf_at_boundary: Vec<Rat> = boundaries
        .iter()
        .map(|b| match overrides.get(b) {
            Some(v) => v.clone(),
            None => {
                let own = pieces.iter().position(|p| p.contains(b)).unwrap();
                dpolys[own].eval(b)
            }
        })
        .collect();

    Ok(PiecewiseFn {
        pieces,
        overrides,
        breakpoints,
        boundaries,
        dpolys,
        boundary_slopes,
        adf_at_boundary,
    })
}

fn neighbor_slopes(pieces: &[Piece], b: &Rat) -> (Rat, Rat) {
    let left = pieces
        .iter()
        .find(|p| p.hi == Ext::Fin(b.clone()) && !p.is_singleton())
        .expect("interior boundary has a left neighbor");
    let right = pieces
        .iter()
        .find(|p| p.lo == Ext::Fin(b.clone()) && !p.is_singleton())
        .expect("interior boundary has a right neighbor");
    (
        left.poly.derivative().eval(b),
        right.poly.derivative().eval(b),
    )
}

fn compute_breakpoints(pieces: &[Piece], boundaries: &[Rat]) -> BreakpointSets {
    let mut ndf = BTreeSet::new();
    for b in boundaries {
        let (l, r) = neighbor_slopes(pieces, b);
        if l != r {
            ndf.insert(b.clone());
        }
    }
    // Polynomial pieces: wherever the one-sided derivatives agree the
    // derivative is continuous, so ncdf coincides with ndf.
    let ncdf = ndf.clone();

    // Zero set: closed intervals from identically-zero pieces, isolated
    // roots from the others.
    let mut zero_intervals: Vec<(Ext, Ext)> = Vec::new();
    let mut points: BTreeSet<Rat> = BTreeSet::new();
    let mut extra = 0usize;
    for p in pieces {
        if p.poly.is_zero() {
            if p.is_singleton() {
                points.insert(p.lo.fin().unwrap().clone());
            } else {
                zero_intervals.push((p.lo.clone(), p.hi.clone()));
            }
            continue;
        }
        if p.is_singleton() {
            let b = p.lo.fin().unwrap();
            if p.poly.eval(b).is_zero() {
                points.insert(b.clone());
            }
            continue;
        }
        // Open-interior roots.
        let total = p.poly.count_roots_open(&p.lo, &p.hi);
        let rational: Vec<Rat> = p
            .poly
            .rational_roots()
            .unwrap_or_default()
            .into_iter()
            .filter(|r| {
                let above = match &p.lo {
                    Ext::NegInf => true,
                    Ext::Fin(l) => r > l,
                    Ext::PosInf => false,
                };
                let below = match &p.hi {
                    Ext::NegInf => false,
                    Ext::Fin(h) => r < h,
                    Ext::PosInf => true,
                };
                above && below
            })
            .collect();
        extra += total - rational.len();
        points.extend(rational);
        // Endpoint roots are handled uniformly below via the boundary list.
    }
    for b in boundaries {
        let owner = pieces.iter().find(|p| p.contains(b)).unwrap();
        if owner.poly.eval(b).is_zero() {
            points.insert(b.clone());
        }
    }

    // Merge zero intervals (the function is continuous, so the closure of
    // an identically-zero piece is in the zero set).
    zero_intervals.sort_by(|a, b| a.0.cmp(&b.0));
    let mut merged: Vec<(Ext, Ext)> = Vec::new();
    for (lo, hi) in zero_intervals {
        match merged.last_mut() {
            Some((_, mhi)) if *mhi >= lo => {
                if hi > *mhi {
                    *mhi = hi;
                }
            }
            _ => merged.push((lo, hi)),
        }
    }
    // Absorb points lying inside merged intervals, then boundary points of Z
    // are the finite interval endpoints plus the surviving isolated points.
    let in_zero_interval = |x: &Rat| {
        merged.iter().any(|(lo, hi)| {
            let above = match lo {
                Ext::NegInf => true,
                Ext::Fin(l) => x >= l,
                Ext::PosInf => false,
            };
            let below = match hi {
                Ext::NegInf => false,
                Ext::Fin(h) => x <= h,
                Ext::PosInf => true,
            };
            above && below
        })
    };
    let mut bdz: BTreeSet<Rat> = points.into_iter().filter(|x| !in_zero_interval(x)).collect();
    for (lo, hi) in &merged {
        if let Ext::Fin(l) = lo {
            bdz.insert(l.clone());
        }
        if let Ext::Fin(h) = hi {
            bdz.insert(h.clone());
        }
    }

    BreakpointSets {
        ndf,
        bdz,
        bdz_extra: extra,
        ncdf,
    }
}

impl PiecewiseFn {
    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn overrides(&self) -> &BTreeMap<Rat, Rat> {
        &self.overrides
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    /// Index of the unique piece whose interval contains `x`.
    pub fn owning_piece(&self, x: &Rat) -> usize {
        self.pieces
            .iter()
            .position(|p| p.contains(x))
            .expect("pieces partition the line")
    }

    /// Indices of all pieces whose closure contains `x` (1 off breakpoints,
    /// 2 at a shared endpoint, 3 when a singleton piece sits there).
    pub fn closure_pieces(&self, x: &Rat) -> Vec<usize> {
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.closure_contains(x))
            .map(|(i, _)| i)
            .collect()
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.pieces[self.owning_piece(x)].poly.eval(x)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        // Float path for finite-difference checks; piece selection is by
        // comparison against the exact breakpoints converted to f64.
        for p in &self.pieces {
            let above = match &p.lo {
                Ext::NegInf => true,
                Ext::Fin(l) => {
                    let lf = l.to_f64();
                    x > lf || (p.lo_closed && x == lf)
                }
                Ext::PosInf => false,
            };
            let below = match &p.hi {
                Ext::NegInf => false,
                Ext::Fin(h) => {
                    let hf = h.to_f64();
                    x < hf || (p.hi_closed && x == hf)
                }
                Ext::PosInf => true,
            };
            if above && below {
                return p.poly.eval_f64(x);
            }
        }
        f64::NAN
    }

    /// The extended-derivative value used by AD at `x`: a per-breakpoint
    /// override if present, otherwise the derivative of the owning piece.
    pub fn adf_eval(&self, x: &Rat) -> Rat {
        match self.boundaries.binary_search(x) {
            Ok(idx) => self.adf_at_boundary[idx].clone(),
            Err(_) => self.dpolys[self.owning_piece(x)].eval(x),
        }
    }

    /// Derivative of piece `k`'s polynomial at `x` (the piece need not own `x`).
    pub fn piece_slope(&self, k: usize, x: &Rat) -> Rat {
        self.dpolys[k].eval(x)
    }

    pub fn breakpoints(&self) -> &BreakpointSets {
        &self.breakpoints
    }

    pub fn boundaries(&self) -> &[Rat] {
        &self.boundaries
    }

    /// One-sided derivative limits `(left, right)` at an interior boundary.
    pub fn one_sided_slopes(&self, b: &Rat) -> (Rat, Rat) {
        let idx = self
            .boundaries
            .binary_search(b)
            .expect("an interior boundary point");
        self.boundary_slopes[idx].clone()
    }

    /// Whether `x` lies on a boundary between pieces.
    pub fn is_boundary(&self, x: &Rat) -> bool {
        self.boundaries.binary_search(x).is_ok()
    }

    /// True iff the extended-derivative policy is consistent: at every
    /// non-differentiable point its value is one of the two one-sided
    /// derivative limits.
    pub fn is_consistent(&self) -> bool {
        self.breakpoints.ndf.iter().all(|b| {
            let v = self.adf_eval(b);
            let (l, r) = self.one_sided_slopes(b);
            v == l || v == r
        })
    }
}

/// Serialization helper: `PiecewiseFn` deserializes through validation.
#[derive(Deserialize)]
struct RawPiecewise {
    pieces: Vec<Piece>,
    #[serde(default)]
    overrides: BTreeMap<Rat, Rat>,
}

impl<'de> Deserialize<'de> for PiecewiseFn {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawPiecewise::deserialize(deserializer)?;
        make_piecewise(raw.pieces, raw.overrides).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Which piece owns a shared breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Own {
    Left,
    Right,
}

/// The identity function as a single piece.
pub fn identity() -> PiecewiseFn {
    make_piecewise(
        vec![Piece::new(Ext::NegInf, false, Ext::PosInf, false, Poly::x())],
        BTreeMap::new(),
    )
    .unwrap()
}

/// ReLU with a choice of breakpoint ownership; `Own::Left` gives the usual
/// zero derivative at the origin.
pub fn relu_owned(own: Own) -> PiecewiseFn {
    let (lc, rc) = match own {
        Own::Left => (true, false),
        Own::Right => (false, true),
    };
    make_piecewise(
        vec![
            Piece::new(Ext::NegInf, false, Ext::Fin(Rat::zero()), lc, Poly::zero()),
            Piece::new(Ext::Fin(Rat::zero()), rc, Ext::PosInf, false, Poly::x()),
        ],
        BTreeMap::new(),
    )
    .unwrap()
}

pub fn relu() -> PiecewiseFn {
    relu_owned(Own::Left)
}

/// ReLU whose AD derivative at 0 is the constant `c` (inconsistent unless
/// `c` is 0 or 1).
pub fn relu_with_adf0(c: Rat) -> Result<PiecewiseFn, ScalarFunError> {
    let mut overrides = BTreeMap::new();
    overrides.insert(Rat::zero(), c);
    let pieces = relu().pieces.clone();
    make_piecewise(pieces, overrides)
}

pub fn leaky_relu(slope: Rat) -> Result<PiecewiseFn, ScalarFunError> {
    if slope.is_one() {
        return Err(ScalarFunError::BadParams(
            "leaky slope 1 is the identity".into(),
        ));
    }
    make_piecewise(
        vec![
            Piece::new(
                Ext::NegInf,
                false,
                Ext::Fin(Rat::zero()),
                true,
                Poly::linear(Rat::zero(), slope),
            ),
            Piece::new(Ext::Fin(Rat::zero()), false, Ext::PosInf, false, Poly::x()),
        ],
        BTreeMap::new(),
    )
}

/// `clamp(x/6 + 1/2, 0, 1)`: saturates at ±3, and the saturated pieces own
/// the breakpoints.
pub fn hard_sigmoid() -> PiecewiseFn {
    let m3 = Rat::from_int(-3);
    let p3 = Rat::from_int(3);
    make_piecewise(
        vec![
            Piece::new(Ext::NegInf, false, Ext::Fin(m3.clone()), true, Poly::zero()),
            Piece::new(
                Ext::Fin(m3),
                false,
                Ext::Fin(p3.clone()),
                false,
                Poly::linear(Rat::new(1, 2), Rat::new(1, 6)),
            ),
            Piece::new(
                Ext::Fin(p3),
                true,
                Ext::PosInf,
                false,
                Poly::constant(Rat::one()),
            ),
        ],
        BTreeMap::new(),
    )
    .unwrap()
}

/// A single polynomial piece on all of the line.
pub fn polynomial(coeffs: Vec<Rat>) -> PiecewiseFn {
    make_piecewise(
        vec![Piece::new(
            Ext::NegInf,
            false,
            Ext::PosInf,
            false,
            Poly::new(coeffs),
        )],
        BTreeMap::new(),
    )
    .unwrap()
}

/// Continuous piecewise-linear interpolation of `(points[i], values[i])`
/// with constant tails. Every interior point must be a genuine kink; each
/// breakpoint is owned by the piece to its right, so AD takes the right
/// slope there.
pub fn sawtooth_kinks(points: &[Rat], values: &[Rat]) -> Result<PiecewiseFn, ScalarFunError> {
    if points.is_empty() || points.len() != values.len() {
        return Err(ScalarFunError::BadParams(
            "need equally many points and values, at least one".into(),
        ));
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScalarFunError::BadParams(
            "points must be strictly ascending".into(),
        ));
    }
    let mut slopes = vec![Rat::zero()]; // left tail
    for i in 0..points.len() - 1 {
        let s = (&values[i + 1] - &values[i]) / (&points[i + 1] - &points[i]);
        slopes.push(s);
    }
    slopes.push(Rat::zero()); // right tail
    for w in slopes.windows(2) {
        if w[0] == w[1] {
            return Err(ScalarFunError::BadParams(
                "adjacent segments share a slope; not a kink".into(),
            ));
        }
    }
    let mut pieces = Vec::new();
    for (i, s) in slopes.iter().enumerate() {
        // Segment i spans (points[i-1], points[i]); value at points[j] is values[j].
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
        // Line through (anchor, value) with slope s.
        let anchor_idx = if i == 0 { 0 } else { i - 1 };
        let intercept = &values[anchor_idx] - &(s * &points[anchor_idx]);
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

/// An everywhere-analytic polynomial `h` whose real zeros are exactly the
/// given points, each crossed with slope `±1` (the sign is forced by the
/// interleaving of consecutive simple zeros). Fails with `BadParams` if the
/// points repeat or the no-extra-zeros certificate cannot be established.
pub fn hermite_zero_slope1(points: &[Rat]) -> Result<PiecewiseFn, ScalarFunError> {
    if points.is_empty() {
        return Err(ScalarFunError::BadParams("need at least one point".into()));
    }
    let mut sorted = points.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(ScalarFunError::BadParams("duplicate points".into()));
    }
    // p = prod (x - x_j)
    let mut p = Poly::constant(Rat::one());
    for x in &sorted {
        p = p.mul(&Poly::linear(-x.clone(), Rat::one()));
    }
    let dp = p.derivative();
    // Interpolate q with q(x_j) = 1/|p'(x_j)| > 0 (Lagrange).
    let mut q = Poly::zero();
    for (j, xj) in sorted.iter().enumerate() {
        let target = dp.eval(xj).abs().recip();
        let mut basis = Poly::constant(Rat::one());
        for (k, xk) in sorted.iter().enumerate() {
            if k != j {
                let denom = xj - xk;
                basis = basis.mul(&Poly::linear(-xk / &denom, denom.recip()));
            }
        }
        q = q.add(&basis.scale(&target));
    }
    // Make the cofactor strictly positive by adding mu * p^2; a large enough
    // mu always exists because q is positive at every x_j.
    let p2 = p.mul(&p);
    let mut mu = Rat::zero();
    for _ in 0..64 {
        let r = q.add(&p2.scale(&mu));
        let positive_everywhere = r.leading().map_or(false, |c| c.is_positive())
            && (r.degree() % 2 == 0 || r.degree() == 0)
            && r.count_roots_open(&Ext::NegInf, &Ext::PosInf) == 0;
        let constant_positive = r.degree() == 0 && r.leading().map_or(false, |c| c.is_positive());
        if positive_everywhere || constant_positive {
            let h = p.mul(&r);
            return Ok(polynomial(h.coeffs().to_vec()));
        }
        mu = if mu.is_zero() {
            Rat::one()
        } else {
            &mu * &Rat::from_int(4)
        };
    }
    Err(ScalarFunError::BadParams(
        "could not certify a zero-free cofactor".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn bset(xs: &[Rat]) -> BTreeSet<Rat> {
        xs.iter().cloned().collect()
    }

    #[test]
    fn relu_is_valid_and_has_unit_breakpoints() {
        let f = relu();
        let b = f.breakpoints();
        assert_eq!(b.ndf, bset(&[rat(0, 1)]));
        assert_eq!(b.bdz, bset(&[rat(0, 1)]));
        assert_eq!(b.ncdf, bset(&[rat(0, 1)]));
        assert_eq!(b.bdz_extra, 0);
        assert_eq!(f.eval(&rat(-2, 1)), rat(0, 1));
        assert_eq!(f.eval(&rat(3, 1)), rat(3, 1));
        assert_eq!(f.adf_eval(&rat(0, 1)), rat(0, 1)); // left ownership
        assert_eq!(relu_owned(Own::Right).adf_eval(&rat(0, 1)), rat(1, 1));
    }

    #[test]
    fn rejects_jump_discontinuity() {
        // left piece 0, right piece x+1: jump at 0.
        let err = make_piecewise(
            vec![
                Piece::new(Ext::NegInf, false, Ext::Fin(rat(0, 1)), true, Poly::zero()),
                Piece::new(
                    Ext::Fin(rat(0, 1)),
                    false,
                    Ext::PosInf,
                    false,
                    Poly::linear(rat(1, 1), rat(1, 1)),
                ),
            ],
            BTreeMap::new(),
        )
        .unwrap_err();
        assert_eq!(err, ScalarFunError::Discontinuous(rat(0, 1)));
    }

    #[test]
    fn rejects_gap_and_overlap() {
        // Both pieces own 0.
        let err = make_piecewise(
            vec![
                Piece::new(Ext::NegInf, false, Ext::Fin(rat(0, 1)), true, Poly::zero()),
                Piece::new(Ext::Fin(rat(0, 1)), true, Ext::PosInf, false, Poly::x()),
            ],
            BTreeMap::new(),
        )
        .unwrap_err();
        assert_eq!(err, ScalarFunError::GapOrOverlap);
        // Missing left tail.
        let err = make_piecewise(
            vec![Piece::new(
                Ext::Fin(rat(0, 1)),
                true,
                Ext::PosInf,
                false,
                Poly::x(),
            )],
            BTreeMap::new(),
        )
        .unwrap_err();
        assert_eq!(err, ScalarFunError::GapOrOverlap);
    }

    #[test]
    fn quadratic_left_piece_is_continuous() {
        // x^2 on (-inf,0], x on (0,inf): value 0 at the joint, kink in slope.
        let f = make_piecewise(
            vec![
                Piece::new(
                    Ext::NegInf,
                    false,
                    Ext::Fin(rat(0, 1)),
                    true,
                    Poly::new(vec![rat(0, 1), rat(0, 1), rat(1, 1)]),
                ),
                Piece::new(Ext::Fin(rat(0, 1)), false, Ext::PosInf, false, Poly::x()),
            ],
            BTreeMap::new(),
        )
        .unwrap();
        assert_eq!(f.eval(&rat(2, 1)), rat(2, 1));
        assert_eq!(f.eval(&rat(-2, 1)), rat(4, 1));
        assert_eq!(f.breakpoints().ndf, bset(&[rat(0, 1)]));
    }

    #[test]
    fn identity_breakpoints() {
        let f = identity();
        let b = f.breakpoints();
        assert!(b.ndf.is_empty());
        assert_eq!(b.bdz, bset(&[rat(0, 1)]));
        assert!(b.ncdf.is_empty());
    }

    #[test]
    fn hard_sigmoid_breakpoints() {
        let f = hard_sigmoid();
        assert_eq!(f.eval(&rat(0, 1)), rat(1, 2));
        let b = f.breakpoints();
        assert_eq!(b.ndf, bset(&[rat(-3, 1), rat(3, 1)]));
        assert_eq!(b.ncdf, bset(&[rat(-3, 1), rat(3, 1)]));
        assert_eq!(b.bdz, bset(&[rat(-3, 1)]));
    }

    #[test]
    fn consistency_checks() {
        assert!(relu().is_consistent());
        assert!(relu_owned(Own::Right).is_consistent());
        assert!(!relu_with_adf0(rat(5, 1)).unwrap().is_consistent());
        assert!(relu_with_adf0(rat(1, 1)).unwrap().is_consistent());
        // Overrides at differentiable points are rejected outright.
        let mut ov = BTreeMap::new();
        ov.insert(rat(1, 1), rat(7, 1));
        let err = make_piecewise(relu().pieces().to_vec(), ov).unwrap_err();
        assert_eq!(err, ScalarFunError::InvalidOverride(rat(1, 1)));
    }

    #[test]
    fn adf_matches_piece_derivative_off_breakpoints() {
        let f = hard_sigmoid();
        assert_eq!(f.adf_eval(&rat(0, 1)), rat(1, 6));
        assert_eq!(f.adf_eval(&rat(-4, 1)), rat(0, 1));
        assert_eq!(f.adf_eval(&rat(3, 1)), rat(0, 1)); // owned by the saturated piece
        assert_eq!(f.adf_eval(&rat(-3, 1)), rat(0, 1));
    }

    #[test]
    fn sawtooth_kinks_shape() {
        // Values from the two-kink staircase on (0, inf): h(1)=1, h(2)=2.
        let f = sawtooth_kinks(&[rat(1, 1), rat(2, 1)], &[rat(1, 1), rat(2, 1)]).unwrap();
        let b = f.breakpoints();
        assert_eq!(b.ndf, bset(&[rat(1, 1), rat(2, 1)]));
        assert_eq!(f.eval(&rat(0, 1)), rat(1, 1)); // constant left tail
        assert_eq!(f.eval(&rat(3, 2)), rat(3, 2));
        assert_eq!(f.eval(&rat(5, 1)), rat(2, 1)); // constant right tail
        // Right ownership: AD uses the right piece's slope at each kink.
        assert_eq!(f.adf_eval(&rat(1, 1)), rat(1, 1));
        assert_eq!(f.adf_eval(&rat(2, 1)), rat(0, 1));
        assert!(f.is_consistent());
    }

    #[test]
    fn leaky_relu_slope() {
        let f = leaky_relu(rat(1, 10)).unwrap();
        assert_eq!(f.eval(&rat(-2, 1)), rat(-1, 5));
        assert_eq!(f.eval(&rat(3, 1)), rat(3, 1));
        assert_eq!(f.breakpoints().ndf, bset(&[rat(0, 1)]));
        assert_eq!(f.adf_eval(&rat(0, 1)), rat(1, 10)); // left ownership
        assert!(f.is_consistent());
        assert!(leaky_relu(rat(1, 1)).is_err());
    }

    #[test]
    fn hermite_single_point_is_shifted_identity() {
        let h = hermite_zero_slope1(&[rat(0, 1)]).unwrap();
        assert_eq!(h.pieces()[0].poly, Poly::x());
        let b = h.breakpoints();
        assert!(b.ndf.is_empty());
        assert_eq!(b.bdz, bset(&[rat(0, 1)]));
    }

    #[test]
    fn hermite_two_points_has_exactly_two_zeros_and_unit_slopes() {
        let pts = [rat(1, 1), rat(3, 1)];
        let h = hermite_zero_slope1(&pts).unwrap();
        let poly = &h.pieces()[0].poly;
        let dpoly = poly.derivative();
        for p in &pts {
            assert!(poly.eval(p).is_zero());
            assert_eq!(dpoly.eval(p).abs(), rat(1, 1));
        }
        assert_eq!(h.breakpoints().bdz_len(), 2);
        assert_eq!(h.breakpoints().bdz, bset(&pts));
        assert!(h.breakpoints().ndf.is_empty());
    }

    #[test]
    fn hermite_rejects_duplicates() {
        assert!(matches!(
            hermite_zero_slope1(&[rat(1, 1), rat(1, 1)]),
            Err(ScalarFunError::BadParams(_))
        ));
    }

    #[test]
    fn bdz_of_zero_function_is_empty() {
        let f = polynomial(vec![]);
        assert_eq!(f.breakpoints().bdz_len(), 0);
    }

    #[test]
    fn bdz_counts_irrational_roots() {
        // x^2 - 2: two irrational boundary points.
        let f = polynomial(vec![rat(-2, 1), rat(0, 1), rat(1, 1)]);
        let b = f.breakpoints();
        assert!(b.bdz.is_empty());
        assert_eq!(b.bdz_extra, 2);
        assert_eq!(b.bdz_len(), 2);
        assert_eq!(b.ndf_union_bdz_len(), 2);
    }

    #[test]
    fn partition_property_every_point_owned_once() {
        let f = hard_sigmoid();
        for x in [-4, -3, -1, 0, 2, 3, 7] {
            let x = rat(x, 1);
            let owners = f.pieces().iter().filter(|p| p.contains(&x)).count();
            assert_eq!(owners, 1);
        }
    }
}
