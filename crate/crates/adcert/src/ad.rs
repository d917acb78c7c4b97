//! Exact forward- and reverse-mode automatic differentiation.
//!
//! Both modes apply the chain rule to the canonical layered program: exact
//! polynomial derivatives for the pre-activations and the extended
//! derivative (`adf_eval`) for each activation. Reverse mode additionally
//! materializes every hidden partial `d out / d z_{l,i}` in a single
//! backward sweep.
//!
//! A *piece assignment* picks one analytic piece per neuron; replacing each
//! activation by its chosen piece polynomial yields a globally smooth
//! selection function whose exact jacobian `piece_jacobian` computes. At
//! the active assignment (the pieces the forward pass actually used) the
//! selection jacobian coincides with the AD output whenever no derivative
//! override is touched.

use crate::network::{ForwardTrace, Network, NetworkError};
use crate::rat::Rat;

/// Row-major exact matrix.
pub type Mat = Vec<Vec<Rat>>;

pub fn mat_zero(rows: usize, cols: usize) -> Mat {
    vec![vec![Rat::zero(); cols]; rows]
}

pub fn mat_is_zero(m: &Mat) -> bool {
    m.iter().all(|r| r.iter().all(Rat::is_zero))
}

pub fn vec_is_zero(v: &[Rat]) -> bool {
    v.iter().all(Rat::is_zero)
}

/// One piece index per neuron, in layer order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PieceAssignment(pub Vec<Vec<usize>>);

impl PieceAssignment {
    pub fn get(&self, l: usize, i: usize) -> usize {
        self.0[l][i]
    }
}

#[derive(Debug, thiserror::Error)]
#[error("piece-assignment enumeration needs {needed} assignments, cap is {cap}")]
pub struct ExplosionGuard {
    pub cap: usize,
    pub needed: u128,
}

pub const DEFAULT_ASSIGNMENT_CAP: usize = 1 << 20;

/// Everything reverse mode computes at one point.
#[derive(Clone, Debug)]
pub struct ADReport {
    /// `N_L x W` jacobian as computed by AD.
    pub jacobian: Mat,
    /// `hidden[l][i]` is the vector `d out / d z_{l,i}` in `R^{N_L}`.
    pub hidden: Vec<Vec<Vec<Rat>>>,
    pub active: PieceAssignment,
    pub trace: ForwardTrace,
}

/// Reverse-mode AD: jacobian plus all hidden partials.
pub fn reverse_ad(net: &Network, w: &[Rat]) -> Result<ADReport, NetworkError> {
    let trace = net.forward(w)?;
    Ok(reverse_ad_at(net, w, trace))
}

/// Reverse-mode AD reusing an already computed forward trace.
pub fn reverse_ad_at(net: &Network, w: &[Rat], trace: ForwardTrace) -> ADReport {
    let depth = net.depth();
    let out_dim = net.output_dim();
    let mut jacobian = mat_zero(out_dim, net.param_count());
    let mut hidden: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(depth);
    for layer in net.layers() {
        hidden.push(vec![vec![Rat::zero(); out_dim]; layer.out_dim]);
    }
    // Output layer: d out / d z_{L,i} = e_i.
    for i in 0..out_dim {
        hidden[depth - 1][i][i] = Rat::one();
    }
    for l in (0..depth).rev() {
        let layer = &net.layers()[l];
        let offset = net.param_offset(l);
        let wl = &w[offset..offset + layer.params];
        let x: &[Rat] = if l == 0 {
            net.input()
        } else {
            &trace.z[l - 1]
        };
        // Adjoints of the pre-activations: scale by the extended derivative.
        let y_adj: Vec<Vec<Rat>> = (0..layer.out_dim)
            .map(|i| {
                let s = layer.activations[i].adf_eval(&trace.y[l][i]);
                hidden[l][i].iter().map(|h| h * &s).collect()
            })
            .collect();
        // Parameter columns of this layer.
        for (i, adj) in y_adj.iter().enumerate() {
            if vec_is_zero(adj) {
                continue;
            }
            for k in 0..layer.params {
                let d = layer.d_pre_dw(i, k, x, wl);
                if d.is_zero() {
                    continue;
                }
                for (r, a) in adj.iter().enumerate() {
                    jacobian[r][offset + k] += &(a * &d);
                }
            }
        }
        // Propagate to the previous layer's activations.
        if l > 0 {
            for j in 0..layer.in_dim {
                let mut acc = vec![Rat::zero(); out_dim];
                for (i, adj) in y_adj.iter().enumerate() {
                    if vec_is_zero(adj) {
                        continue;
                    }
                    let d = layer.d_pre_dx(i, j, x, wl);
                    if d.is_zero() {
                        continue;
                    }
                    for (r, a) in adj.iter().enumerate() {
                        acc[r] += &(a * &d);
                    }
                }
                hidden[l - 1][j] = acc;
            }
        }
    }
    let active = active_assignment_of(net, &trace);
    ADReport {
        jacobian,
        hidden,
        active,
        trace,
    }
}

/// Forward-mode AD: tangent propagation. Produces the same matrix as
/// reverse mode, column by column.
pub fn forward_ad(net: &Network, w: &[Rat]) -> Result<Mat, NetworkError> {
    let trace = net.forward(w)?;
    let total = net.param_count();
    // Tangent of the current layer's activations with respect to all params.
    let mut jz: Mat = mat_zero(net.input().len(), total);
    let mut offset = 0;
    for (l, layer) in net.layers().iter().enumerate() {
        let wl = &w[offset..offset + layer.params];
        let x: &[Rat] = if l == 0 {
            net.input()
        } else {
            &trace.z[l - 1]
        };
        let mut jy = mat_zero(layer.out_dim, total);
        for i in 0..layer.out_dim {
            for j in 0..layer.in_dim {
                let d = layer.d_pre_dx(i, j, x, wl);
                if d.is_zero() {
                    continue;
                }
                for c in 0..total {
                    if !jz[j][c].is_zero() {
                        let t = &jz[j][c] * &d;
                        jy[i][c] += &t;
                    }
                }
            }
            for k in 0..layer.params {
                let d = layer.d_pre_dw(i, k, x, wl);
                if !d.is_zero() {
                    jy[i][offset + k] += &d;
                }
            }
        }
        let mut next = mat_zero(layer.out_dim, total);
        for i in 0..layer.out_dim {
            let s = layer.activations[i].adf_eval(&trace.y[l][i]);
            if s.is_zero() {
                continue;
            }
            for c in 0..total {
                if !jy[i][c].is_zero() {
                    next[i][c] = &jy[i][c] * &s;
                }
            }
        }
        jz = next;
        offset += layer.params;
    }
    Ok(jz)
}

/// The unique assignment whose region contains `w`: each pre-activation is
/// mapped to the piece whose interval owns its value.
pub fn active_assignment(net: &Network, w: &[Rat]) -> Result<PieceAssignment, NetworkError> {
    let trace = net.forward(w)?;
    Ok(active_assignment_of(net, &trace))
}

pub fn active_assignment_of(net: &Network, trace: &ForwardTrace) -> PieceAssignment {
    PieceAssignment(
        net.layers()
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                (0..layer.out_dim)
                    .map(|i| layer.activations[i].owning_piece(&trace.y[l][i]))
                    .collect()
            })
            .collect(),
    )
}

/// All assignments whose region *closure* contains `w`: the product over
/// neurons of the pieces whose interval closure contains the pre-activation
/// value.
pub fn closure_assignments(
    net: &Network,
    w: &[Rat],
    cap: usize,
) -> Result<Vec<PieceAssignment>, ExplosionGuard> {
    let trace = net.forward(w).expect("parameter length checked by caller");
    closure_assignments_of(net, &trace, cap)
}

pub fn closure_assignments_of(
    net: &Network,
    trace: &ForwardTrace,
    cap: usize,
) -> Result<Vec<PieceAssignment>, ExplosionGuard> {
    let mut choices: Vec<Vec<usize>> = Vec::new();
    let mut shape: Vec<usize> = Vec::new();
    let mut needed: u128 = 1;
    for (l, layer) in net.layers().iter().enumerate() {
        shape.push(layer.out_dim);
        for i in 0..layer.out_dim {
            let c = layer.activations[i].closure_pieces(&trace.y[l][i]);
            needed = needed.saturating_mul(c.len() as u128);
            if needed > cap as u128 {
                return Err(ExplosionGuard { cap, needed });
            }
            choices.push(c);
        }
    }
    let mut out = Vec::with_capacity(needed as usize);
    let mut counter = vec![0usize; choices.len()];
    loop {
        let mut flat = counter
            .iter()
            .zip(&choices)
            .map(|(&c, opts)| opts[c]);
        let assignment = PieceAssignment(
            shape
                .iter()
                .map(|&n| (&mut flat).take(n).collect())
                .collect(),
        );
        out.push(assignment);
        // Odometer.
        let mut pos = choices.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            counter[pos] += 1;
            if counter[pos] < choices[pos].len() {
                break;
            }
            counter[pos] = 0;
        }
    }
}

/// Forward trace of the selection function for `gamma`: every activation is
/// replaced by its chosen piece polynomial (evaluated even outside the
/// piece's interval).
pub fn gamma_forward(net: &Network, gamma: &PieceAssignment, w: &[Rat]) -> ForwardTrace {
    let mut y = Vec::with_capacity(net.depth());
    let mut z = Vec::with_capacity(net.depth());
    let mut x: Vec<Rat> = net.input().to_vec();
    let mut offset = 0;
    for (l, layer) in net.layers().iter().enumerate() {
        let wl = &w[offset..offset + layer.params];
        offset += layer.params;
        let yl: Vec<Rat> = (0..layer.out_dim)
            .map(|i| layer.pre_activation(i, &x, wl))
            .collect();
        let zl: Vec<Rat> = yl
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k = gamma.get(l, i);
                layer.activations[i].pieces()[k].poly.eval(v)
            })
            .collect();
        x = zl.clone();
        y.push(yl);
        z.push(zl);
    }
    ForwardTrace { y, z }
}

/// Exact jacobian of the selection function for `gamma` at `w`, by tangent
/// propagation with each piece's own polynomial derivative (derivative
/// overrides are ignored by construction).
pub fn piece_jacobian(net: &Network, gamma: &PieceAssignment, w: &[Rat]) -> Mat {
    let trace = gamma_forward(net, gamma, w);
    let total = net.param_count();
    let mut jz: Mat = mat_zero(net.input().len(), total);
    let mut offset = 0;
    for (l, layer) in net.layers().iter().enumerate() {
        let wl = &w[offset..offset + layer.params];
        let x: &[Rat] = if l == 0 {
            net.input()
        } else {
            &trace.z[l - 1]
        };
        let mut jy = mat_zero(layer.out_dim, total);
        for i in 0..layer.out_dim {
            for j in 0..layer.in_dim {
                let d = layer.d_pre_dx(i, j, x, wl);
                if d.is_zero() {
                    continue;
                }
                for c in 0..total {
                    if !jz[j][c].is_zero() {
                        let t = &jz[j][c] * &d;
                        jy[i][c] += &t;
                    }
                }
            }
            for k in 0..layer.params {
                let d = layer.d_pre_dw(i, k, x, wl);
                if !d.is_zero() {
                    jy[i][offset + k] += &d;
                }
            }
        }
        let mut next = mat_zero(layer.out_dim, total);
        for i in 0..layer.out_dim {
            let k = gamma.get(l, i);
            let s = layer.activations[i].piece_slope(k, &trace.y[l][i]);
            if s.is_zero() {
                continue;
            }
            for c in 0..total {
                if !jy[i][c].is_zero() {
                    next[i][c] = &jy[i][c] * &s;
                }
            }
        }
        jz = next;
        offset += layer.params;
    }
    jz
}
