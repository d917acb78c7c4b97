//! Shared generators for the integration suites: random fully-biased
//! networks with piecewise-linear activations kinked at grid points.

use adcert::network::{Layer, LayerKind, MultiPoly, Network, Subject, Term};
use adcert::poly::{Ext, Poly};
use adcert::rat::Rat;
use adcert::scalarfun::{make_piecewise, Piece, PiecewiseFn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n, d)
}

/// A random continuous piecewise-linear activation with up to `max_kinks`
/// genuine kinks at grid points and random breakpoint ownership.
pub fn random_pwl(rng: &mut ChaCha8Rng, grid: &[Rat], max_kinks: usize) -> PiecewiseFn {
    let k = rng.gen_range(0..=max_kinks.min(grid.len()));
    if k == 0 {
        // An affine piece keeps the network nontrivial without kinks.
        let a = Rat::from_int(rng.gen_range(-2..=2));
        let b = Rat::from_int(rng.gen_range(-2..=2));
        return adcert::scalarfun::polynomial(vec![a, b]);
    }
    // Distinct kink abscissas drawn from the grid.
    let mut points: Vec<Rat> = Vec::new();
    while points.len() < k {
        let c = grid[rng.gen_range(0..grid.len())].clone();
        if !points.contains(&c) {
            points.push(c);
        }
    }
    points.sort();
    // Slopes with all consecutive pairs distinct.
    let mut slopes: Vec<Rat> = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        loop {
            let s = Rat::from_int(rng.gen_range(-2..=2));
            if slopes.last() != Some(&s) {
                slopes.push(s);
                break;
            }
        }
    }
    let anchor = Rat::from_int(rng.gen_range(-1..=1));
    // Values at the kinks from the anchor value at the first kink.
    let mut values = vec![anchor];
    for i in 1..k {
        let step = &slopes[i] * &(&points[i] - &points[i - 1]);
        let v = values.last().unwrap() + &step;
        values.push(v);
    }
    let mut pieces = Vec::new();
    let mut owners: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
    owners.push(false); // sentinel
    for (i, s) in slopes.iter().enumerate() {
        let (lo, lo_closed) = if i == 0 {
            (Ext::NegInf, false)
        } else {
            (Ext::Fin(points[i - 1].clone()), !owners[i - 1])
        };
        let (hi, hi_closed) = if i == k {
            (Ext::PosInf, false)
        } else {
            (Ext::Fin(points[i].clone()), owners[i])
        };
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
    make_piecewise(pieces, BTreeMap::new()).expect("generated pieces are a valid partition")
}

/// A random network in which every layer carries bias parameters:
/// `tau_{l,i}(x, v) = f_i(x) + v_i` with random integer-linear `f_i`.
/// Shapes keep the parameter total at or below `max_params`.
pub fn random_bias_network(rng: &mut ChaCha8Rng, grid: &[Rat], max_params: usize) -> Subject {
    let shapes: &[&[usize]] = &[
        &[1],
        &[2],
        &[3],
        &[1, 1],
        &[2, 1],
        &[1, 2],
        &[2, 2],
        &[3, 1],
        &[1, 3],
        &[1, 1, 1],
        &[2, 1, 1],
        &[1, 2, 1],
        &[1, 1, 2],
    ];
    let eligible: Vec<&&[usize]> = shapes
        .iter()
        .filter(|s| s.iter().sum::<usize>() <= max_params)
        .collect();
    let shape = eligible[rng.gen_range(0..eligible.len())];
    let in_dim0 = rng.gen_range(1..=2);
    let input: Vec<Rat> = (0..in_dim0)
        .map(|_| Rat::from_int(rng.gen_range(-2..=2)))
        .collect();
    let mut layers = Vec::new();
    let mut in_dim = in_dim0;
    for (li, &out_dim) in shape.iter().enumerate() {
        let maps: Vec<MultiPoly> = (0..out_dim)
            .map(|_| {
                let mut terms = Vec::new();
                for j in 0..in_dim {
                    let c = rng.gen_range(-2..=2);
                    if c != 0 {
                        terms.push(Term {
                            coef: Rat::from_int(c),
                            xs: vec![j],
                            us: vec![],
                        });
                    }
                }
                if rng.gen_bool(0.3) {
                    terms.push(Term {
                        coef: Rat::from_int(rng.gen_range(-1..=1)),
                        xs: vec![],
                        us: vec![],
                    });
                }
                MultiPoly { terms }
            })
            .collect();
        let last = li + 1 == shape.len();
        let activations: Vec<PiecewiseFn> = (0..out_dim)
            .map(|_| {
                if last && rng.gen_bool(0.5) {
                    adcert::scalarfun::identity()
                } else {
                    random_pwl(rng, grid, 3)
                }
            })
            .collect();
        layers.push(Layer {
            in_dim,
            out_dim,
            params: out_dim,
            kind: LayerKind::AffineWithBias { maps },
            activations,
        });
        in_dim = out_dim;
    }
    Subject::unpinned(Network::new(layers, input).expect("generated network is valid"))
}

/// Every point of `grid^free` in a fixed order.
pub fn grid_points(grid: &[Rat], free: usize) -> Vec<Vec<Rat>> {
    let mut out = Vec::with_capacity(grid.len().pow(free as u32));
    let mut counter = vec![0usize; free];
    loop {
        out.push(counter.iter().map(|&d| grid[d].clone()).collect());
        let mut pos = 0;
        loop {
            if pos == free {
                return out;
            }
            counter[pos] += 1;
            if counter[pos] < grid.len() {
                break;
            }
            counter[pos] = 0;
            pos += 1;
        }
    }
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
