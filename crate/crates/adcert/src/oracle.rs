//! Theorem-independent ground truth.
//!
//! Differentiability of the (restricted) network function at a point is
//! decided exactly, in three stages:
//!
//! 1. *Closure agreement*: if every piece assignment whose region closure
//!    contains the point has the same selection jacobian, the function is
//!    differentiable with that jacobian.
//! 2. *Tangent cells*: the first-order directional derivative is a
//!    piecewise-linear function of the direction; its linear pieces live on
//!    polyhedral cones cut out by the tangent functionals of the kink
//!    neurons. Enumerating the full-dimensional cones (with an exact
//!    feasibility solver pruning unrealizable sign patterns) yields every
//!    one-sided gradient. All gradients equal means differentiable — the
//!    function is locally Lipschitz, so a linear directional derivative is
//!    a full derivative; two distinct gradients certify the opposite.
//! 3. A non-differentiability *witness* is then extracted by probing rays:
//!    the network restricted to a ray is polynomial on a first segment
//!    whose piece assignment follows from exact sign analysis, so one-sided
//!    directional derivatives carry no tolerance.
//!
//! Verdicts degrade to `Inconclusive` only when an enumeration cap is hit.

use crate::ad::{
    closure_assignments_of, piece_jacobian, Mat, PieceAssignment,
    DEFAULT_ASSIGNMENT_CAP,
};
use crate::network::{ForwardTrace, Network, Subject};
use crate::poly::{Ext, Poly};
use crate::rat::Rat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod simplex;

pub use simplex::feasible_strict;

/// Probe and enumeration budget; deterministic given the seed.
#[derive(Clone, Debug)]
pub struct OracleBudget {
    pub directions: usize,
    pub seed: u64,
    pub assignment_cap: usize,
    pub cell_cap: usize,
}

impl OracleBudget {
    pub fn for_width(free: usize) -> Self {
        OracleBudget {
            directions: 2 * free + 8,
            seed: 0,
            assignment_cap: DEFAULT_ASSIGNMENT_CAP,
            cell_cap: DEFAULT_ASSIGNMENT_CAP,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// A witness of non-differentiability.
#[derive(Clone, Debug)]
pub enum Witness {
    /// One-sided derivatives along `direction` and its negation are not
    /// negatives of each other.
    TwoSided {
        direction: Vec<Rat>,
        forward: Vec<Rat>,
        backward: Vec<Rat>,
    },
    /// Two direction cones carry different one-sided gradients (covers
    /// points where every +/- pair happens to be compatible).
    ConeSplit {
        dir_a: Vec<Rat>,
        grad_a: Mat,
        dir_b: Vec<Rat>,
        grad_b: Mat,
    },
}

#[derive(Clone, Debug)]
pub enum OracleVerdict {
    /// Exact gradient over the free parameters.
    Differentiable(Mat),
    NonDifferentiable(Witness),
    /// Budget exhausted; carries the reason.
    Inconclusive(String),
}

impl OracleVerdict {
    pub fn is_differentiable(&self) -> bool {
        matches!(self, OracleVerdict::Differentiable(_))
    }
}

// ---------------------------------------------------------------------------
// Ray restriction
// ---------------------------------------------------------------------------

/// The network along `w + t d`, restricted to the first region the open ray
/// enters: piece choices and the exact output polynomials in `t`.
#[derive(Clone, Debug)]
pub struct RaySlice {
    pub assignment: PieceAssignment,
    pub output: Vec<Poly>,
}

impl RaySlice {
    /// One-sided directional derivative `d/dt z(w + t d)` at `t -> 0^+`.
    pub fn one_sided(&self) -> Vec<Rat> {
        self.output
            .iter()
            .map(|p| p.coeffs().get(1).cloned().unwrap_or_default())
            .collect()
    }
}

/// Restrict the network to the ray `t -> w + t d` and select, per neuron,
/// the piece active immediately after `t = 0` (by the sign of the first
/// non-zero coefficient of the pre-activation's deviation).
pub fn ray_restriction(net: &Network, w: &[Rat], d: &[Rat]) -> RaySlice {
    let mut x: Vec<Poly> = net
        .input()
        .iter()
        .map(|c| Poly::constant(c.clone()))
        .collect();
    let mut assignment = Vec::with_capacity(net.depth());
    let mut offset = 0;
    for layer in net.layers() {
        let wl: Vec<Poly> = (0..layer.params)
            .map(|k| Poly::linear(w[offset + k].clone(), d[offset + k].clone()))
            .collect();
        offset += layer.params;
        let mut choice = Vec::with_capacity(layer.out_dim);
        let mut next = Vec::with_capacity(layer.out_dim);
        for i in 0..layer.out_dim {
            let y_poly = layer.pre_activation_poly(i, &x, &wl);
            let v0 = y_poly.eval(&Rat::zero());
            let deviation = y_poly.sub(&Poly::constant(v0.clone()));
            let side = deviation.sign_at_zero_plus();
            let act = &layer.activations[i];
            let k = match side {
                0 => act.owning_piece(&v0),
                s => act
                    .pieces()
                    .iter()
                    .position(|p| {
                        let lo_ok = match &p.lo {
                            Ext::NegInf => true,
                            Ext::Fin(l) => {
                                if s > 0 {
                                    l <= &v0
                                } else {
                                    l < &v0
                                }
                            }
                            Ext::PosInf => false,
                        };
                        let hi_ok = match &p.hi {
                            Ext::PosInf => true,
                            Ext::Fin(h) => {
                                if s > 0 {
                                    h > &v0
                                } else {
                                    h >= &v0
                                }
                            }
                            Ext::NegInf => false,
                        };
                        lo_ok && hi_ok
                    })
                    .expect("pieces cover a neighborhood of the value"),
            };
            choice.push(k);
            next.push(act.pieces()[k].poly.compose(&y_poly));
        }
        assignment.push(choice);
        x = next;
    }
    RaySlice {
        assignment: PieceAssignment(assignment),
        output: x,
    }
}

/// One-sided directional derivative of the restricted function along a free
/// direction.
pub fn one_sided_derivative(subject: &Subject, w_free: &[Rat], d_free: &[Rat]) -> Vec<Rat> {
    let w = subject.embed(w_free).expect("free vector length");
    let d = embed_direction(subject, d_free);
    ray_restriction(&subject.network, &w, &d).one_sided()
}

fn embed_direction(subject: &Subject, d_free: &[Rat]) -> Vec<Rat> {
    let mut out = Vec::with_capacity(subject.pins.len());
    let mut it = d_free.iter();
    for p in &subject.pins {
        match p {
            Some(_) => out.push(Rat::zero()),
            None => out.push(it.next().unwrap().clone()),
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Tangent cells
// ---------------------------------------------------------------------------

/// One full-dimensional direction cone with its one-sided gradient and an
/// interior direction.
#[derive(Clone, Debug)]
pub struct Cell {
    pub grad: Mat,
    pub witness: Vec<Rat>,
}

struct CellEnum<'a> {
    net: &'a Network,
    trace: &'a ForwardTrace,
    w_full: Vec<Rat>,
    /// For every full parameter slot, its free-coordinate index (None for pins).
    free_pos: Vec<Option<usize>>,
    nfree: usize,
    cap: usize,
    cells: Vec<Cell>,
    slopes: Vec<Vec<NeuronSlope>>,
}

fn vec_zero(n: usize) -> Vec<Rat> {
    vec![Rat::zero(); n]
}

fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(Rat::is_zero)
}

fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-neuron first-order behavior at the point, precomputed once.
enum NeuronSlope {
    /// A genuine derivative exists at the value.
    Smooth(Rat),
    /// Value on a kink: one-sided slopes (left, right).
    Kink(Rat, Rat),
}

/// State cloned only when both sides of a kink are feasible.
#[derive(Clone)]
struct CellState {
    /// Flat `rows x nfree` tangent of the current layer prefix.
    dz: Vec<Rat>,
    constraints: Vec<Vec<Rat>>,
    witness: Vec<Rat>,
}

impl<'a> CellEnum<'a> {
    fn run(mut self) -> Result<Vec<Cell>, String> {
        let slopes: Vec<Vec<NeuronSlope>> = self
            .net
            .layers()
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                (0..layer.out_dim)
                    .map(|i| {
                        let act = &layer.activations[i];
                        let y = &self.trace.y[l][i];
                        if act.is_boundary(y) {
                            let (sl, sr) = act.one_sided_slopes(y);
                            if sl == sr {
                                NeuronSlope::Smooth(sl)
                            } else {
                                NeuronSlope::Kink(sl, sr)
                            }
                        } else {
                            NeuronSlope::Smooth(act.piece_slope(act.owning_piece(y), y))
                        }
                    })
                    .collect()
            })
            .collect();
        self.slopes = slopes;
        let seed_witness = if self.nfree == 0 {
            Vec::new()
        } else {
            let mut v = vec_zero(self.nfree);
            v[0] = Rat::one();
            v
        };
        let state = CellState {
            dz: vec![Rat::zero(); self.net.input().len() * self.nfree],
            constraints: Vec::new(),
            witness: seed_witness,
        };
        self.layer(0, state)?;
        Ok(self.cells)
    }

    fn layer(&mut self, l: usize, state: CellState) -> Result<(), String> {
        if l == self.net.depth() {
            if self.cells.len() >= self.cap {
                return Err(format!("tangent cone count exceeds the cap {}", self.cap));
            }
            let nf = self.nfree.max(1);
            let grad = if self.nfree == 0 {
                vec![Vec::new(); self.net.output_dim()]
            } else {
                state.dz.chunks(nf).map(|c| c.to_vec()).collect()
            };
            self.cells.push(Cell {
                grad,
                witness: state.witness,
            });
            return Ok(());
        }
        let layer = &self.net.layers()[l];
        let offset = self.net.param_offset(l);
        let x: &[Rat] = if l == 0 {
            self.net.input()
        } else {
            &self.trace.z[l - 1]
        };
        let wl = &self.w_full[offset..offset + layer.params];
        let nf = self.nfree;
        let mut dy: Vec<Rat> = vec![Rat::zero(); layer.out_dim * nf];
        for i in 0..layer.out_dim {
            let row = &mut dy[i * nf..(i + 1) * nf];
            for j in 0..layer.in_dim {
                let c = layer.d_pre_dx(i, j, x, wl);
                if c.is_zero() {
                    continue;
                }
                let dzj = &state.dz[j * nf..(j + 1) * nf];
                for (t, v) in row.iter_mut().zip(dzj) {
                    if !v.is_zero() {
                        *t += &(&c * v);
                    }
                }
            }
            for k in 0..layer.params {
                if let Some(pos) = self.free_pos[offset + k] {
                    let c = layer.d_pre_dw(i, k, x, wl);
                    if !c.is_zero() {
                        row[pos] += &c;
                    }
                }
            }
        }
        let next = CellState {
            dz: Vec::with_capacity(layer.out_dim * nf),
            constraints: state.constraints,
            witness: state.witness,
        };
        self.neuron(l, 0, &dy, next)
    }

    fn neuron(&mut self, l: usize, i: usize, dy: &[Rat], mut state: CellState) -> Result<(), String> {
        let layer = &self.net.layers()[l];
        let nf = self.nfree;
        for i in i..layer.out_dim {
            let functional = &dy[i * nf..(i + 1) * nf];
            let (sl, sr) = match &self.slopes[l][i] {
                NeuronSlope::Smooth(s) => {
                    let s = s.clone();
                    push_scaled(&mut state.dz, functional, &s);
                    continue;
                }
                NeuronSlope::Kink(sl, sr) => (sl.clone(), sr.clone()),
            };
            let (sl, sr) = (&sl, &sr);
            if is_zero_vec(functional) {
                // The tangent does not move this neuron; its contribution
                // is zero to first order whatever piece applies.
                state.dz.extend(std::iter::repeat_with(Rat::zero).take(nf));
                continue;
            }
            // Feasibility of each side given the accumulated cone.
            let wsign = dot(functional, &state.witness).signum();
            let mut sides: [Option<Vec<Rat>>; 2] = [None, None]; // witness per side
            for (slot, branch_sign) in [(0usize, 1i32), (1usize, -1i32)] {
                if wsign == branch_sign {
                    sides[slot] = Some(state.witness.clone());
                    continue;
                }
                let row: Vec<Rat> = if branch_sign > 0 {
                    functional.to_vec()
                } else {
                    functional.iter().map(|v| -v).collect()
                };
                if state.constraints.iter().any(|c| opposed_parallel(c, &row)) {
                    continue;
                }
                // The row itself often satisfies the whole system.
                if state
                    .constraints
                    .iter()
                    .all(|c| dot(c, &row).is_positive())
                {
                    sides[slot] = Some(row);
                } else {
                    let mut cs = state.constraints.clone();
                    cs.push(row);
                    sides[slot] = feasible_strict(&cs, nf);
                }
            }
            let [pos, neg] = sides;
            let descend = |this: &mut Self, mut st: CellState, slope: &Rat, row_sign: i32, witness: Vec<Rat>| {
                let row: Vec<Rat> = if row_sign > 0 {
                    functional.to_vec()
                } else {
                    functional.iter().map(|v| -v).collect()
                };
                st.constraints.push(row);
                st.witness = witness;
                push_scaled(&mut st.dz, functional, slope);
                this.neuron(l, i + 1, dy, st)
            };
            return match (pos, neg) {
                (Some(wp), Some(wn)) => {
                    descend(self, state.clone(), sr, 1, wp)?;
                    descend(self, state, sl, -1, wn)
                }
                (Some(wp), None) => descend(self, state, sr, 1, wp),
                (None, Some(wn)) => descend(self, state, sl, -1, wn),
                (None, None) => Ok(()), // dead cone (can happen only at the root seed)
            };
        }
        self.layer(l + 1, state)
    }
}

fn push_scaled(dst: &mut Vec<Rat>, v: &[Rat], s: &Rat) {
    if s.is_zero() {
        dst.extend(std::iter::repeat_with(Rat::zero).take(v.len()));
    } else {
        dst.extend(v.iter().map(|x| x * s));
    }
}

fn scale_vec(v: &[Rat], s: &Rat) -> Vec<Rat> {
    if s.is_zero() {
        return vec_zero(v.len());
    }
    v.iter().map(|x| x * s).collect()
}

/// True iff `a` and `b` are parallel with opposite orientation (the cone
/// `{a > 0, b > 0}` is then trivially empty).
fn opposed_parallel(a: &[Rat], b: &[Rat]) -> bool {
    let pivot = match b.iter().position(|v| !v.is_zero()) {
        Some(i) => i,
        None => return false,
    };
    if !(&a[pivot] * &b[pivot]).is_negative() {
        return false;
    }
    // Proportionality against the pivot coordinate.
    for j in 0..a.len() {
        if j != pivot && &a[j] * &b[pivot] != &a[pivot] * &b[j] {
            return false;
        }
    }
    true
}

/// Enumerate the full-dimensional tangent cones of the restricted function
/// at `w_free`.
pub fn tangent_cells(
    subject: &Subject,
    w_free: &[Rat],
    cap: usize,
) -> Result<Vec<Cell>, String> {
    let w = subject.embed(w_free).map_err(|e| e.to_string())?;
    let trace = subject.network.forward(&w).map_err(|e| e.to_string())?;
    tangent_cells_at(subject, w, &trace, cap)
}

fn tangent_cells_at(
    subject: &Subject,
    w_full: Vec<Rat>,
    trace: &ForwardTrace,
    cap: usize,
) -> Result<Vec<Cell>, String> {
    let mut free_pos = Vec::with_capacity(subject.pins.len());
    let mut nfree = 0;
    for p in &subject.pins {
        if p.is_none() {
            free_pos.push(Some(nfree));
            nfree += 1;
        } else {
            free_pos.push(None);
        }
    }
    let en = CellEnum {
        net: &subject.network,
        trace,
        free_pos,
        nfree,
        cap,
        cells: Vec::new(),
        slopes: Vec::new(),
        w_full,
    };
    en.run()
}

// ---------------------------------------------------------------------------
// Differentiability oracle
// ---------------------------------------------------------------------------

/// Decide differentiability of the restricted function at `w_free`.
/// Upgrades cone-split evidence to a two-sided ray witness where one
/// exists.
pub fn oracle_differentiability(
    subject: &Subject,
    w_free: &[Rat],
    budget: &OracleBudget,
) -> OracleVerdict {
    decide_differentiability(subject, w_free, budget, true)
}

/// Same decision without the ray-witness upgrade; non-differentiable
/// verdicts carry the (already exact) cone-split evidence. This is what the
/// classifier and censuses use, since they only need the verdict.
pub fn differentiability_quick(
    subject: &Subject,
    w_free: &[Rat],
    budget: &OracleBudget,
) -> OracleVerdict {
    decide_differentiability(subject, w_free, budget, false)
}

/// Quick decision reusing an existing forward trace.
pub fn differentiability_quick_at(
    subject: &Subject,
    w_full: &[Rat],
    trace: &ForwardTrace,
    budget: &OracleBudget,
) -> OracleVerdict {
    let cells = match tangent_cells_at(subject, w_full.to_vec(), trace, budget.cell_cap) {
        Ok(c) => c,
        Err(e) => return OracleVerdict::Inconclusive(e),
    };
    split_verdict(cells)
}

fn split_verdict(cells: Vec<Cell>) -> OracleVerdict {
    for a in 0..cells.len() {
        for b in a + 1..cells.len() {
            if cells[a].grad != cells[b].grad {
                return OracleVerdict::NonDifferentiable(Witness::ConeSplit {
                    dir_a: cells[a].witness.clone(),
                    grad_a: cells[a].grad.clone(),
                    dir_b: cells[b].witness.clone(),
                    grad_b: cells[b].grad.clone(),
                });
            }
        }
    }
    OracleVerdict::Differentiable(cells.into_iter().next().expect("at least one cell").grad)
}

fn decide_differentiability(
    subject: &Subject,
    w_free: &[Rat],
    budget: &OracleBudget,
    want_ray_witness: bool,
) -> OracleVerdict {
    let w = match subject.embed(w_free) {
        Ok(w) => w,
        Err(e) => return OracleVerdict::Inconclusive(e.to_string()),
    };
    if want_ray_witness {
        // Stage 1 (closure agreement): sufficient for differentiability by
        // selection merging. The cell enumeration below decides the same
        // questions, so this stage is kept on the thorough path only.
        let trace = match subject.network.forward(&w) {
            Ok(t) => t,
            Err(e) => return OracleVerdict::Inconclusive(e.to_string()),
        };
        if let Ok(gammas) =
            closure_assignments_of(&subject.network, &trace, budget.assignment_cap.min(64))
        {
            let mut jac: Option<Mat> = None;
            let mut agree = true;
            for g in &gammas {
                let pj = project_mat(subject, &piece_jacobian(&subject.network, g, &w));
                match &jac {
                    None => jac = Some(pj),
                    Some(prev) if *prev != pj => {
                        agree = false;
                        break;
                    }
                    _ => {}
                }
            }
            if agree {
                return OracleVerdict::Differentiable(jac.expect("at least one assignment"));
            }
        }
    }
    // Stage 2: exact tangent-cone enumeration.
    let cells = match tangent_cells(subject, w_free, budget.cell_cap) {
        Ok(c) => c,
        Err(e) => return OracleVerdict::Inconclusive(e),
    };
    let mut split: Option<(usize, usize)> = None;
    'outer: for a in 0..cells.len() {
        for b in a + 1..cells.len() {
            if cells[a].grad != cells[b].grad {
                split = Some((a, b));
                break 'outer;
            }
        }
    }
    let (a, b) = match split {
        None => {
            return OracleVerdict::Differentiable(
                cells.into_iter().next().expect("at least one cell").grad,
            )
        }
        Some(p) => p,
    };
    if !want_ray_witness {
        return OracleVerdict::NonDifferentiable(Witness::ConeSplit {
            dir_a: cells[a].witness.clone(),
            grad_a: cells[a].grad.clone(),
            dir_b: cells[b].witness.clone(),
            grad_b: cells[b].grad.clone(),
        });
    }
    // Stage 3: extract a witness along a probed ray.
    let nfree = subject.free_count();
    let mut candidates: Vec<Vec<Rat>> = vec![cells[a].witness.clone(), cells[b].witness.clone()];
    for i in 0..nfree {
        let mut e = vec![Rat::zero(); nfree];
        e[i] = Rat::one();
        candidates.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.directions {
        let d: Vec<Rat> = (0..nfree)
            .map(|_| Rat::from_int(rng.gen_range(-9i64..=9)))
            .collect();
        if !is_zero_vec(&d) {
            candidates.push(d);
        }
    }
    for d in &candidates {
        if is_zero_vec(d) {
            continue;
        }
        let fwd = one_sided_derivative(subject, w_free, d);
        let neg: Vec<Rat> = d.iter().map(|x| -x).collect();
        let bwd = one_sided_derivative(subject, w_free, &neg);
        let compatible = fwd.iter().zip(&bwd).all(|(f, g)| (f + g).is_zero());
        if !compatible {
            return OracleVerdict::NonDifferentiable(Witness::TwoSided {
                direction: d.clone(),
                forward: fwd,
                backward: bwd,
            });
        }
    }
    OracleVerdict::NonDifferentiable(Witness::ConeSplit {
        dir_a: cells[a].witness.clone(),
        grad_a: cells[a].grad.clone(),
        dir_b: cells[b].witness.clone(),
        grad_b: cells[b].grad.clone(),
    })
}

fn project_mat(subject: &Subject, m: &Mat) -> Mat {
    m.iter().map(|row| subject.project_row(row)).collect()
}

// ---------------------------------------------------------------------------
// Clarke limit oracle
// ---------------------------------------------------------------------------

/// True iff `g` (over the free parameters) is the selection jacobian of a
/// region that provably accumulates at the point along a ray: a limit of
/// nearby true gradients.
pub fn oracle_clarke_limit(
    subject: &Subject,
    w_free: &[Rat],
    g: &Mat,
    budget: &OracleBudget,
) -> bool {
    let w = match subject.embed(w_free) {
        Ok(w) => w,
        Err(_) => return false,
    };
    let trace = match subject.network.forward(&w) {
        Ok(t) => t,
        Err(_) => return false,
    };
    oracle_clarke_limit_at(subject, &w, &trace, g, budget)
}

/// Clarke-limit check reusing an existing forward trace.
pub fn oracle_clarke_limit_at(
    subject: &Subject,
    w: &[Rat],
    trace: &ForwardTrace,
    g: &Mat,
    budget: &OracleBudget,
) -> bool {
    let nfree = subject.free_count();
    if nfree == 0 {
        return g.iter().all(|row| row.is_empty());
    }
    // Fast path: the active region with a strictly entering direction. If
    // every boundary-touching pre-activation moves strictly into its active
    // piece to first order, a short segment of the ray stays in the region;
    // no polynomial analysis is needed.
    let active = crate::ad::active_assignment_of(&subject.network, trace);
    if project_mat(subject, &piece_jacobian(&subject.network, &active, w)) == *g
        && strict_cone_entry(subject, w, trace, &active)
    {
        return true;
    }
    let w = w.to_vec();
    let trace = trace.clone();
    let net = &subject.network;
    // Probe rays: the region owning a first segment accumulates at w.
    let try_dir = |d_free: &[Rat]| -> bool {
        if is_zero_vec(d_free) {
            return false;
        }
        let d = embed_direction(subject, d_free);
        let slice = ray_restriction(net, &w, &d);
        let pj = project_mat(subject, &piece_jacobian(net, &slice.assignment, &w));
        pj == *g
    };
    for i in 0..nfree {
        for sign in [1i64, -1] {
            let mut e = vec![Rat::zero(); nfree];
            e[i] = Rat::from_int(sign);
            if try_dir(&e) {
                return true;
            }
        }
    }
    // Targeted: for each closure assignment matching g, search a direction
    // entering its region (strict first-order feasibility), then verify the
    // ray exactly.
    if let Ok(gammas) = closure_assignments_of(net, &trace, budget.assignment_cap) {
        let mut free_pos = Vec::with_capacity(subject.pins.len());
        let mut cnt = 0;
        for p in &subject.pins {
            if p.is_none() {
                free_pos.push(Some(cnt));
                cnt += 1;
            } else {
                free_pos.push(None);
            }
        }
        'gamma: for gamma in &gammas {
            let pj = project_mat(subject, &piece_jacobian(net, gamma, &w));
            if pj != *g {
                continue;
            }
            // Tangent functionals of each pre-activation under gamma slopes.
            let mut constraints: Vec<Vec<Rat>> = Vec::new();
            let mut dz_prev: Vec<Vec<Rat>> = vec![vec![Rat::zero(); nfree]; net.input().len()];
            let mut offset = 0;
            for (l, layer) in net.layers().iter().enumerate() {
                let x: &[Rat] = if l == 0 { net.input() } else { &trace.z[l - 1] };
                let wl = &w[offset..offset + layer.params];
                let mut dz_next = Vec::with_capacity(layer.out_dim);
                for i in 0..layer.out_dim {
                    let mut row = vec![Rat::zero(); nfree];
                    for (j, dzj) in dz_prev.iter().enumerate() {
                        let c = layer.d_pre_dx(i, j, x, wl);
                        if c.is_zero() {
                            continue;
                        }
                        for (t, v) in row.iter_mut().zip(dzj) {
                            if !v.is_zero() {
                                *t += &(&c * v);
                            }
                        }
                    }
                    for k in 0..layer.params {
                        if let Some(pos) = free_pos[offset + k] {
                            let c = layer.d_pre_dw(i, k, x, wl);
                            if !c.is_zero() {
                                row[pos] += &c;
                            }
                        }
                    }
                    // Region-entry constraint for this neuron.
                    let y = &trace.y[l][i];
                    let piece = &layer.activations[i].pieces()[gamma.get(l, i)];
                    let at_lo = piece.lo == Ext::Fin(y.clone());
                    let at_hi = piece.hi == Ext::Fin(y.clone());
                    if at_lo && at_hi {
                        // Singleton piece: the value must stay put, which a
                        // strict cone cannot express; rely on probes.
                        if !is_zero_vec(&row) {
                            continue 'gamma;
                        }
                    } else if at_lo && !is_zero_vec(&row) {
                        constraints.push(row.clone());
                    } else if at_hi && !is_zero_vec(&row) {
                        constraints.push(row.iter().map(|v| -v).collect());
                    }
                    let s = layer.activations[i].piece_slope(gamma.get(l, i), y);
                    dz_next.push(scale_vec(&row, &s));
                }
                dz_prev = dz_next;
                offset += layer.params;
            }
            let dir = if constraints.is_empty() {
                let mut e = vec![Rat::zero(); nfree];
                e[0] = Rat::one();
                Some(e)
            } else {
                feasible_strict(&constraints, nfree)
            };
            if let Some(d) = dir {
                if try_dir(&d) {
                    return true;
                }
            }
        }
    }
    // Random probes as a last resort.
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    for _ in 0..budget.directions {
        let d: Vec<Rat> = (0..nfree)
            .map(|_| Rat::from_int(rng.gen_range(-9i64..=9)))
            .collect();
        if try_dir(&d) {
            return true;
        }
    }
    false
}

/// True iff the region of the active piece assignment provably accumulates
/// at the point along a straight ray (strict first-order entry). When AD
/// uses no derivative override at the touched breakpoints, its output is
/// the active selection jacobian, so this certificate alone makes the AD
/// output a limit of nearby true gradients.
pub fn active_region_accumulates(subject: &Subject, w: &[Rat], trace: &ForwardTrace) -> bool {
    let active = crate::ad::active_assignment_of(&subject.network, trace);
    strict_cone_entry(subject, w, trace, &active)
}

/// True iff a direction exists along which every pre-activation that sits
/// on a finite boundary of its `gamma` piece moves strictly into the piece
/// to first order (with `gamma`-selected slopes upstream). Sound but not
/// complete: tangentially-entering regions are left to the exact ray path.
fn strict_cone_entry(
    subject: &Subject,
    w: &[Rat],
    trace: &ForwardTrace,
    gamma: &PieceAssignment,
) -> bool {
    let net = &subject.network;
    let nfree = subject.free_count();
    let mut free_pos = Vec::with_capacity(subject.pins.len());
    let mut cnt = 0;
    for p in &subject.pins {
        if p.is_none() {
            free_pos.push(Some(cnt));
            cnt += 1;
        } else {
            free_pos.push(None);
        }
    }
    let mut constraints: Vec<Vec<Rat>> = Vec::new();
    let mut dz_prev: Vec<Vec<Rat>> = vec![vec![Rat::zero(); nfree]; net.input().len()];
    let mut offset = 0;
    for (l, layer) in net.layers().iter().enumerate() {
        let x: &[Rat] = if l == 0 { net.input() } else { &trace.z[l - 1] };
        let wl = &w[offset..offset + layer.params];
        let mut dz_next = Vec::with_capacity(layer.out_dim);
        for i in 0..layer.out_dim {
            let mut row = vec![Rat::zero(); nfree];
            for (j, dzj) in dz_prev.iter().enumerate() {
                let c = layer.d_pre_dx(i, j, x, wl);
                if c.is_zero() {
                    continue;
                }
                for (t, v) in row.iter_mut().zip(dzj) {
                    if !v.is_zero() {
                        *t += &(&c * v);
                    }
                }
            }
            for k in 0..layer.params {
                if let Some(pos) = free_pos[offset + k] {
                    let c = layer.d_pre_dw(i, k, x, wl);
                    if !c.is_zero() {
                        row[pos] += &c;
                    }
                }
            }
            let y = &trace.y[l][i];
            let piece = &layer.activations[i].pieces()[gamma.get(l, i)];
            let at_lo = piece.lo == Ext::Fin(y.clone());
            let at_hi = piece.hi == Ext::Fin(y.clone());
            if at_lo || at_hi {
                if is_zero_vec(&row) {
                    // Higher-order behavior decides; not certifiable here.
                    if !(at_lo && at_hi) {
                        return false;
                    }
                    // Singleton piece with a frozen value is fine.
                } else if at_lo && at_hi {
                    return false;
                } else if at_hi {
                    constraints.push(row.iter().map(|v| -v).collect());
                } else {
                    constraints.push(row.clone());
                }
            }
            let s = layer.activations[i].piece_slope(gamma.get(l, i), y);
            dz_next.push(scale_vec(&row, &s));
        }
        dz_prev = dz_next;
        offset += layer.params;
    }
    feasible_strict(&constraints, nfree).is_some()
}

// ---------------------------------------------------------------------------
// Finite differences
// ---------------------------------------------------------------------------

/// Central finite differences of the restricted function, in floats.
pub fn fd_grad(subject: &Subject, w_free: &[Rat], step: f64) -> Mat2F {
    assert!(step > 0.0);
    let w = subject.embed(w_free).expect("free vector length");
    let base: Vec<f64> = w.iter().map(Rat::to_f64).collect();
    let free = subject.free_slots();
    let out_dim = subject.network.output_dim();
    let mut grad = vec![vec![0.0; free.len()]; out_dim];
    for (col, &slot) in free.iter().enumerate() {
        let mut plus = base.clone();
        plus[slot] += step;
        let mut minus = base.clone();
        minus[slot] -= step;
        let fp = subject.network.forward_f64(&plus);
        let fm = subject.network.forward_f64(&minus);
        for r in 0..out_dim {
            grad[r][col] = (fp[r] - fm[r]) / (2.0 * step);
        }
    }
    grad
}

/// Row-major float matrix.
pub type Mat2F = Vec<Vec<f64>>;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::fixtures::{fixture, FixtureSpec};
    use crate::network::{Layer, LayerKind, MultiPoly, Network, Subject, Term};
    use crate::rat::rat;
    use crate::scalarfun::relu;

    fn budget(free: usize) -> OracleBudget {
        OracleBudget::for_width(free)
    }

    fn relu_bias_subject() -> Subject {
        let net = Network::new(
            vec![Layer {
                in_dim: 1,
                out_dim: 1,
                params: 1,
                kind: LayerKind::AffineWithBias {
                    maps: vec![MultiPoly::zero()],
                },
                activations: vec![relu()],
            }],
            vec![rat(0, 1)],
        )
        .unwrap();
        Subject::unpinned(net)
    }

    #[test]
    fn relu_at_zero_is_nondifferentiable_with_slopes() {
        let s = relu_bias_subject();
        match oracle_differentiability(&s, &[rat(0, 1)], &budget(1)) {
            OracleVerdict::NonDifferentiable(Witness::TwoSided {
                forward, backward, ..
            }) => {
                // slope 1 forward, slope 0 backward (as -0).
                assert!(
                    (forward == vec![rat(1, 1)] && backward == vec![rat(0, 1)])
                        || (forward == vec![rat(0, 1)] && backward == vec![rat(-1, 1)])
                );
            }
            v => panic!("expected a two-sided witness, got {v:?}"),
        }
    }

    #[test]
    fn relu_off_kink_is_differentiable() {
        let s = relu_bias_subject();
        match oracle_differentiability(&s, &[rat(2, 1)], &budget(1)) {
            OracleVerdict::Differentiable(g) => assert_eq!(g, vec![vec![rat(1, 1)]]),
            v => panic!("{v:?}"),
        }
        match oracle_differentiability(&s, &[rat(-1, 1)], &budget(1)) {
            OracleVerdict::Differentiable(g) => assert_eq!(g, vec![vec![rat(0, 1)]]),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn intro_identity_is_differentiable_with_slope_one() {
        let f = fixture(&FixtureSpec::parse("intro_identity").unwrap()).unwrap();
        match oracle_differentiability(&f.subject, &[rat(0, 1)], &budget(1)) {
            OracleVerdict::Differentiable(g) => assert_eq!(g, vec![vec![rat(1, 1)]]),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn intro_half_is_nondifferentiable_with_half_slopes() {
        let f = fixture(&FixtureSpec::parse("intro_half").unwrap()).unwrap();
        match oracle_differentiability(&f.subject, &[rat(0, 1)], &budget(1)) {
            OracleVerdict::NonDifferentiable(Witness::TwoSided {
                forward, backward, ..
            }) => {
                let pair = (forward[0].clone(), backward[0].clone());
                assert!(
                    pair == (rat(1, 1), rat(-1, 2)) || pair == (rat(1, 2), rat(-1, 1)),
                    "unexpected slopes {pair:?}"
                );
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn clarke_limit_for_relu_accepts_both_sides_only() {
        let s = relu_bias_subject();
        let w = [rat(0, 1)];
        let b = budget(1);
        assert!(oracle_clarke_limit(&s, &w, &vec![vec![rat(0, 1)]], &b));
        assert!(oracle_clarke_limit(&s, &w, &vec![vec![rat(1, 1)]], &b));
        assert!(!oracle_clarke_limit(&s, &w, &vec![vec![rat(5, 1)]], &b));
        assert!(!oracle_clarke_limit(&s, &w, &vec![vec![rat(1, 2)]], &b));
    }

    #[test]
    fn clarke_limit_examples_from_intro() {
        let f = fixture(&FixtureSpec::parse("intro_identity").unwrap()).unwrap();
        let b = budget(1);
        assert!(oracle_clarke_limit(
            &f.subject,
            &[rat(0, 1)],
            &vec![vec![rat(1, 1)]],
            &b
        ));
        let f = fixture(&FixtureSpec::parse("intro_half").unwrap()).unwrap();
        assert!(!oracle_clarke_limit(
            &f.subject,
            &[rat(0, 1)],
            &vec![vec![rat(0, 1)]],
            &b
        ));
        assert!(oracle_clarke_limit(
            &f.subject,
            &[rat(0, 1)],
            &vec![vec![rat(1, 2)]],
            &b
        ));
        assert!(oracle_clarke_limit(
            &f.subject,
            &[rat(0, 1)],
            &vec![vec![rat(1, 1)]],
            &b
        ));
    }

    #[test]
    fn ray_restriction_picks_first_segment() {
        let s = relu_bias_subject();
        let slice = ray_restriction(&s.network, &[rat(0, 1)], &[rat(1, 1)]);
        assert_eq!(slice.assignment.get(0, 0), 1);
        assert_eq!(slice.one_sided(), vec![rat(1, 1)]);
        let slice = ray_restriction(&s.network, &[rat(0, 1)], &[rat(-1, 1)]);
        assert_eq!(slice.assignment.get(0, 0), 0);
        assert_eq!(slice.one_sided(), vec![rat(0, 1)]);
    }

    #[test]
    fn fd_matches_exact_gradient_away_from_kinks() {
        let s = relu_bias_subject();
        let g = fd_grad(&s, &[rat(1, 1)], 1e-6);
        assert!((g[0][0] - 1.0).abs() < 1e-6);
        let f = fixture(&FixtureSpec::parse("intro_identity").unwrap()).unwrap();
        let g = fd_grad(&f.subject, &[rat(3, 1)], 1e-6);
        assert!((g[0][0] - 1.0).abs() < 1e-6);
    }
}
