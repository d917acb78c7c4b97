//! Layered network architecture and exact forward evaluation.
//!
//! A network alternates analytic pre-activation maps with pointwise
//! piecewise-polynomial activations, applied to a fixed input vector; the
//! function of interest maps the parameter vector `w` to the last layer's
//! activations. Two pre-activation shapes are supported: affine-with-bias
//! (an arbitrary multilinear map plus one dedicated additive parameter per
//! output) and well-structured biaffine (`x^T M_i u + c_i` with at most one
//! non-zero entry per column of each `M_i`).

pub mod fixtures;

use crate::poly::Poly;
use crate::rat::Rat;
use crate::scalarfun::PiecewiseFn;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("layer {layer}: matrix for output {output} has a column with more than one non-zero")]
    BadBiaffinePattern { layer: usize, output: usize },
    #[error("parameter vector has length {got}, expected {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("pin vector has length {got}, expected {want}")]
    PinLengthMismatch { got: usize, want: usize },
}

/// One multilinear term `coef * prod x[i] * prod u[j]` (indices distinct
/// within each factor list).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub coef: Rat,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub xs: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub us: Vec<usize>,
}

/// A multilinear polynomial in the layer inputs `x` and the non-bias
/// parameters `u`.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MultiPoly {
    pub terms: Vec<Term>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly { terms: Vec::new() }
    }

    pub fn eval(&self, x: &[Rat], u: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for t in &self.terms {
            let mut v = t.coef.clone();
            for &i in &t.xs {
                v *= &x[i];
            }
            for &j in &t.us {
                v *= &u[j];
            }
            acc += &v;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64], u: &[f64]) -> f64 {
        let mut acc = 0.0;
        for t in &self.terms {
            let mut v = t.coef.to_f64();
            for &i in &t.xs {
                v *= x[i];
            }
            for &j in &t.us {
                v *= u[j];
            }
            acc += v;
        }
        acc
    }

    /// Evaluation with polynomial-valued inputs (used to restrict the
    /// network to a parameter ray).
    pub fn eval_poly(&self, x: &[Poly], u: &[Poly]) -> Poly {
        let mut acc = Poly::zero();
        for t in &self.terms {
            let mut v = Poly::constant(t.coef.clone());
            for &i in &t.xs {
                v = v.mul(&x[i]);
            }
            for &j in &t.us {
                v = v.mul(&u[j]);
            }
            acc = acc.add(&v);
        }
        acc
    }

    /// Partial derivative with respect to `x[i]`, evaluated at `(x, u)`.
    pub fn d_x(&self, i: usize, x: &[Rat], u: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for t in &self.terms {
            if !t.xs.contains(&i) {
                continue;
            }
            let mut v = t.coef.clone();
            for &k in &t.xs {
                if k != i {
                    v *= &x[k];
                }
            }
            for &j in &t.us {
                v *= &u[j];
            }
            acc += &v;
        }
        acc
    }

    /// Partial derivative with respect to `u[j]`, evaluated at `(x, u)`.
    pub fn d_u(&self, j: usize, x: &[Rat], u: &[Rat]) -> Rat {
        let mut acc = Rat::zero();
        for t in &self.terms {
            if !t.us.contains(&j) {
                continue;
            }
            let mut v = t.coef.clone();
            for &k in &t.xs {
                v *= &x[k];
            }
            for &l in &t.us {
                if l != j {
                    v *= &u[l];
                }
            }
            acc += &v;
        }
        acc
    }

    fn validate(&self, in_dim: usize, u_dim: usize) -> Result<(), NetworkError> {
        for t in &self.terms {
            for list in [&t.xs, &t.us] {
                let mut seen = list.clone();
                seen.sort_unstable();
                seen.dedup();
                if seen.len() != list.len() {
                    return Err(NetworkError::DimMismatch(
                        "repeated variable in a multilinear term".into(),
                    ));
                }
            }
            if t.xs.iter().any(|&i| i >= in_dim) || t.us.iter().any(|&j| j >= u_dim) {
                return Err(NetworkError::DimMismatch(
                    "term index out of range".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerKind {
    /// `tau_i(x, (u, v)) = f_i(x, u) + v_i`: the last `out_dim` parameter
    /// slots of the layer are the dedicated biases.
    AffineWithBias { maps: Vec<MultiPoly> },
    /// `tau_i(x, u) = x^T M_i u + c_i` with at most one non-zero per column
    /// of each `M_i` (stored dense, rows indexed by `x`).
    WellStructuredBiaffine {
        matrices: Vec<Vec<Vec<Rat>>>,
        constants: Vec<Rat>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Number of parameters this layer consumes.
    pub params: usize,
    #[serde(flatten)]
    pub kind: LayerKind,
    pub activations: Vec<PiecewiseFn>,
}

impl Layer {
    pub fn has_bias(&self) -> bool {
        matches!(self.kind, LayerKind::AffineWithBias { .. })
    }

    fn validate(&self, index: usize) -> Result<(), NetworkError> {
        if self.activations.len() != self.out_dim {
            return Err(NetworkError::DimMismatch(format!(
                "layer {index}: {} activations for {} outputs",
                self.activations.len(),
                self.out_dim
            )));
        }
        match &self.kind {
            LayerKind::AffineWithBias { maps } => {
                if self.params < self.out_dim {
                    return Err(NetworkError::DimMismatch(format!(
                        "layer {index}: bias layer needs at least {} parameters, has {}",
                        self.out_dim, self.params
                    )));
                }
                if maps.len() != self.out_dim {
                    return Err(NetworkError::DimMismatch(format!(
                        "layer {index}: {} maps for {} outputs",
                        maps.len(),
                        self.out_dim
                    )));
                }
                let u_dim = self.params - self.out_dim;
                for m in maps {
                    m.validate(self.in_dim, u_dim)?;
                }
            }
            LayerKind::WellStructuredBiaffine { matrices, constants } => {
                if matrices.len() != self.out_dim || constants.len() != self.out_dim {
                    return Err(NetworkError::DimMismatch(format!(
                        "layer {index}: need {} matrices and constants",
                        self.out_dim
                    )));
                }
                for (i, m) in matrices.iter().enumerate() {
                    if m.len() != self.in_dim || m.iter().any(|row| row.len() != self.params) {
                        return Err(NetworkError::DimMismatch(format!(
                            "layer {index}: matrix for output {i} is not {}x{}",
                            self.in_dim, self.params
                        )));
                    }
                    for col in 0..self.params {
                        let nonzeros = m.iter().filter(|row| !row[col].is_zero()).count();
                        if nonzeros > 1 {
                            return Err(NetworkError::BadBiaffinePattern {
                                layer: index,
                                output: i,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Pre-activation value for output `i` given layer input `x` and layer
    /// parameters `wl`.
    pub fn pre_activation(&self, i: usize, x: &[Rat], wl: &[Rat]) -> Rat {
        match &self.kind {
            LayerKind::AffineWithBias { maps } => {
                let split = self.params - self.out_dim;
                maps[i].eval(x, &wl[..split]) + &wl[split + i]
            }
            LayerKind::WellStructuredBiaffine { matrices, constants } => {
                let m = &matrices[i];
                let mut acc = constants[i].clone();
                for (j, row) in m.iter().enumerate() {
                    if x[j].is_zero() {
                        continue;
                    }
                    for (k, e) in row.iter().enumerate() {
                        if !e.is_zero() {
                            acc += &(&(&x[j] * e) * &wl[k]);
                        }
                    }
                }
                acc
            }
        }
    }

    /// Pre-activation along a ray: inputs and layer parameters are
    /// polynomials in the ray parameter.
    pub fn pre_activation_poly(&self, i: usize, x: &[Poly], wl: &[Poly]) -> Poly {
        match &self.kind {
            LayerKind::AffineWithBias { maps } => {
                let split = self.params - self.out_dim;
                maps[i].eval_poly(x, &wl[..split]).add(&wl[split + i])
            }
            LayerKind::WellStructuredBiaffine { matrices, constants } => {
                let m = &matrices[i];
                let mut acc = Poly::constant(constants[i].clone());
                for (j, row) in m.iter().enumerate() {
                    for (k, e) in row.iter().enumerate() {
                        if !e.is_zero() {
                            acc = acc.add(&x[j].mul(&wl[k]).scale(e));
                        }
                    }
                }
                acc
            }
        }
    }

    fn pre_activation_f64(&self, i: usize, x: &[f64], wl: &[f64]) -> f64 {
        match &self.kind {
            LayerKind::AffineWithBias { maps } => {
                let split = self.params - self.out_dim;
                maps[i].eval_f64(x, &wl[..split]) + wl[split + i]
            }
            LayerKind::WellStructuredBiaffine { matrices, constants } => {
                let m = &matrices[i];
                let mut acc = constants[i].to_f64();
                for (j, row) in m.iter().enumerate() {
                    for (k, e) in row.iter().enumerate() {
                        if !e.is_zero() {
                            acc += x[j] * e.to_f64() * wl[k];
                        }
                    }
                }
                acc
            }
        }
    }

    /// `d tau_i / d x_j` at `(x, wl)`.
    pub fn d_pre_dx(&self, i: usize, j: usize, x: &[Rat], wl: &[Rat]) -> Rat {
        match &self.kind {
            LayerKind::AffineWithBias { maps } => {
                let split = self.params - self.out_dim;
                maps[i].d_x(j, x, &wl[..split])
            }
            LayerKind::WellStructuredBiaffine { matrices, .. } => {
                let row = &matrices[i][j];
                let mut acc = Rat::zero();
                for (k, e) in row.iter().enumerate() {
                    if !e.is_zero() {
                        acc += &(e * &wl[k]);
                    }
                }
                acc
            }
        }
    }

    /// `d tau_i / d wl_k` at `(x, wl)`.
    pub fn d_pre_dw(&self, i: usize, k: usize, x: &[Rat], wl: &[Rat]) -> Rat {
        match &self.kind {
            LayerKind::AffineWithBias { maps } => {
                let split = self.params - self.out_dim;
                if k >= split {
                    if k - split == i {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                } else {
                    maps[i].d_u(k, x, &wl[..split])
                }
            }
            LayerKind::WellStructuredBiaffine { matrices, .. } => {
                let m = &matrices[i];
                let mut acc = Rat::zero();
                for (j, row) in m.iter().enumerate() {
                    if !row[k].is_zero() && !x[j].is_zero() {
                        acc += &(&x[j] * &row[k]);
                    }
                }
                acc
            }
        }
    }
}

/// Per-layer tag entering the general density bounds: empty when the layer
/// has bias parameters (or lies past the output), otherwise the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum STag {
    Empty,
    Full,
}

/// Validation metadata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkMeta {
    /// Every layer has bias parameters.
    pub has_bias: bool,
    /// Every layer is affine-with-bias or pattern-valid biaffine (always
    /// true for a constructed network; reported for config-level checks).
    pub wsb_ok: bool,
    /// `S_l` for `l` in `1..=L+1`.
    pub s_tags: Vec<STag>,
}

/// The exact forward evaluation of a network at one parameter vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardTrace {
    /// Pre-activation values per layer.
    pub y: Vec<Vec<Rat>>,
    /// Activation values per layer.
    pub z: Vec<Vec<Rat>>,
}

impl ForwardTrace {
    pub fn output(&self) -> &[Rat] {
        self.z.last().expect("at least one layer")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Network {
    layers: Vec<Layer>,
    input: Vec<Rat>,
}

impl Network {
    pub fn new(layers: Vec<Layer>, input: Vec<Rat>) -> Result<Self, NetworkError> {
        if layers.is_empty() {
            return Err(NetworkError::DimMismatch("no layers".into()));
        }
        let mut prev = input.len();
        for (i, layer) in layers.iter().enumerate() {
            layer.validate(i)?;
            if layer.in_dim != prev {
                return Err(NetworkError::DimMismatch(format!(
                    "layer {i}: input dimension {} does not chain to {}",
                    layer.in_dim, prev
                )));
            }
            prev = layer.out_dim;
        }
        Ok(Network { layers, input })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input(&self) -> &[Rat] {
        &self.input
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Total parameter count.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.params).sum()
    }

    /// Total neuron count.
    pub fn neuron_count(&self) -> usize {
        self.layers.iter().map(|l| l.out_dim).sum()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim
    }

    /// Offset of layer `l`'s parameters in the flat vector.
    pub fn param_offset(&self, l: usize) -> usize {
        self.layers[..l].iter().map(|x| x.params).sum()
    }

    /// Flat slot of the bias parameter of neuron `(l, i)`; layer must be
    /// affine-with-bias.
    pub fn bias_slot(&self, l: usize, i: usize) -> usize {
        let layer = &self.layers[l];
        debug_assert!(layer.has_bias());
        self.param_offset(l) + (layer.params - layer.out_dim) + i
    }

    /// Iterate neuron indices `(l, i)` in layer order.
    pub fn neuron_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| (0..layer.out_dim).map(move |i| (l, i)))
    }

    pub fn validate(&self) -> NetworkMeta {
        let has_bias = self.layers.iter().all(Layer::has_bias);
        let depth = self.depth();
        let mut s_tags: Vec<STag> = self
            .layers
            .iter()
            .map(|l| {
                if l.has_bias() {
                    STag::Empty
                } else {
                    STag::Full
                }
            })
            .collect();
        s_tags.push(STag::Empty); // S_{L+1}
        debug_assert_eq!(s_tags.len(), depth + 1);
        NetworkMeta {
            has_bias,
            wsb_ok: true,
            s_tags,
        }
    }

    pub fn check_params(&self, w: &[Rat]) -> Result<(), NetworkError> {
        if w.len() != self.param_count() {
            return Err(NetworkError::LengthMismatch {
                got: w.len(),
                want: self.param_count(),
            });
        }
        Ok(())
    }

    /// Exact forward pass.
    pub fn forward(&self, w: &[Rat]) -> Result<ForwardTrace, NetworkError> {
        self.check_params(w)?;
        let mut y = Vec::with_capacity(self.depth());
        let mut z = Vec::with_capacity(self.depth());
        let mut x: &[Rat] = &self.input;
        let mut offset = 0;
        for layer in &self.layers {
            let wl = &w[offset..offset + layer.params];
            offset += layer.params;
            let yl: Vec<Rat> = (0..layer.out_dim)
                .map(|i| layer.pre_activation(i, x, wl))
                .collect();
            let zl: Vec<Rat> = yl
                .iter()
                .zip(&layer.activations)
                .map(|(v, act)| act.eval(v))
                .collect();
            y.push(yl);
            z.push(zl);
            x = z.last().unwrap();
        }
        Ok(ForwardTrace { y, z })
    }

    /// Float forward pass (for finite-difference cross-checks only).
    pub fn forward_f64(&self, w: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.input.iter().map(Rat::to_f64).collect();
        let mut offset = 0;
        for layer in &self.layers {
            let wl = &w[offset..offset + layer.params];
            offset += layer.params;
            let yl: Vec<f64> = (0..layer.out_dim)
                .map(|i| layer.pre_activation_f64(i, &x, wl))
                .collect();
            x = yl
                .iter()
                .zip(&layer.activations)
                .map(|(v, act)| act.eval_f64(*v))
                .collect();
        }
        x
    }

    pub fn to_config_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_config_json(s: &str) -> Result<Self, String> {
        let raw: RawNetwork = serde_json::from_str(s).map_err(|e| e.to_string())?;
        Network::new(raw.layers, raw.input).map_err(|e| e.to_string())
    }
}

#[derive(Deserialize)]
struct RawNetwork {
    layers: Vec<Layer>,
    input: Vec<Rat>,
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawNetwork::deserialize(deserializer)?;
        Network::new(raw.layers, raw.input).map_err(serde::de::Error::custom)
    }
}

/// A network together with an optional pinning of some parameter slots to
/// constants. Classification, the oracle, and censuses operate on the
/// restricted function of the free slots; fixtures use pins to freeze
/// auxiliary slots their construction needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Subject {
    pub network: Network,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pins: Vec<Option<Rat>>,
}

impl Subject {
    pub fn unpinned(network: Network) -> Self {
        let pins = vec![None; network.param_count()];
        Subject { network, pins }
    }

    pub fn with_pins(network: Network, pins: Vec<Option<Rat>>) -> Result<Self, NetworkError> {
        if pins.len() != network.param_count() {
            return Err(NetworkError::PinLengthMismatch {
                got: pins.len(),
                want: network.param_count(),
            });
        }
        Ok(Subject { network, pins })
    }

    pub fn free_count(&self) -> usize {
        self.pins.iter().filter(|p| p.is_none()).count()
    }

    pub fn free_slots(&self) -> Vec<usize> {
        self.pins
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.is_none().then_some(i))
            .collect()
    }

    pub fn has_pins(&self) -> bool {
        self.pins.iter().any(Option::is_some)
    }

    /// Lift a free-parameter vector to the full parameter vector.
    pub fn embed(&self, free: &[Rat]) -> Result<Vec<Rat>, NetworkError> {
        if free.len() != self.free_count() {
            return Err(NetworkError::LengthMismatch {
                got: free.len(),
                want: self.free_count(),
            });
        }
        let mut out = Vec::with_capacity(self.pins.len());
        let mut it = free.iter();
        for p in &self.pins {
            match p {
                Some(v) => out.push(v.clone()),
                None => out.push(it.next().unwrap().clone()),
            }
        }
        Ok(out)
    }

    /// Restrict a gradient row over all parameters to the free columns.
    pub fn project_row(&self, row: &[Rat]) -> Vec<Rat> {
        row.iter()
            .zip(&self.pins)
            .filter_map(|(v, p)| p.is_none().then(|| v.clone()))
            .collect()
    }

    /// Whether layer `l` still has bias parameters after pinning: the layer
    /// is affine-with-bias and none of its dedicated bias slots is pinned.
    pub fn layer_has_bias(&self, l: usize) -> bool {
        let layer = &self.network.layers()[l];
        if !layer.has_bias() {
            return false;
        }
        (0..layer.out_dim).all(|i| self.pins[self.network.bias_slot(l, i)].is_none())
    }

    pub fn has_bias(&self) -> bool {
        (0..self.network.depth()).all(|l| self.layer_has_bias(l))
    }

    /// Whether any slot of layer `l` is pinned.
    pub fn layer_pinned(&self, l: usize) -> bool {
        let off = self.network.param_offset(l);
        let n = self.network.layers()[l].params;
        self.pins[off..off + n].iter().any(Option::is_some)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;
    use crate::scalarfun::{identity, relu};

    /// `z = ReLU(c * w1 + w2)` with input `c = 1`: one affine-with-bias layer.
    pub(crate) fn relu_affine_net() -> Network {
        let maps = vec![MultiPoly {
            terms: vec![Term {
                coef: rat(1, 1),
                xs: vec![0],
                us: vec![0],
            }],
        }];
        Network::new(
            vec![Layer {
                in_dim: 1,
                out_dim: 1,
                params: 2,
                kind: LayerKind::AffineWithBias { maps },
                activations: vec![relu()],
            }],
            vec![rat(1, 1)],
        )
        .unwrap()
    }

    #[test]
    fn forward_relu_affine() {
        let net = relu_affine_net();
        let t = net.forward(&[rat(1, 1), rat(-1, 1)]).unwrap();
        assert_eq!(t.y[0], vec![rat(0, 1)]);
        assert_eq!(t.output(), &[rat(0, 1)]);
        let t = net.forward(&[rat(2, 1), rat(1, 1)]).unwrap();
        assert_eq!(t.output(), &[rat(3, 1)]);
        assert!(matches!(
            net.forward(&[rat(1, 1)]),
            Err(NetworkError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn validate_meta() {
        let net = relu_affine_net();
        let meta = net.validate();
        assert!(meta.has_bias);
        assert_eq!(meta.s_tags, vec![STag::Empty, STag::Empty]);
    }

    #[test]
    fn wsb_pattern_rejected() {
        // A single matrix column (1, 1)^T touches two inputs.
        let bad = Layer {
            in_dim: 2,
            out_dim: 1,
            params: 1,
            kind: LayerKind::WellStructuredBiaffine {
                matrices: vec![vec![vec![rat(1, 1)], vec![rat(1, 1)]]],
                constants: vec![rat(0, 1)],
            },
            activations: vec![identity()],
        };
        let err = Network::new(bad.into_iter(), vec![rat(1, 1), rat(1, 1)]).unwrap_err();
        assert_eq!(
            err,
            NetworkError::BadBiaffinePattern {
                layer: 0,
                output: 0
            }
        );
    }

    trait IntoLayers {
        fn into_iter(self) -> Vec<Layer>;
    }
    impl IntoLayers for Layer {
        fn into_iter(self) -> Vec<Layer> {
            vec![self]
        }
    }

    #[test]
    fn wsb_mixed_s_tags() {
        // Layer 1 biaffine, layer 2 with bias.
        let l1 = Layer {
            in_dim: 1,
            out_dim: 1,
            params: 1,
            kind: LayerKind::WellStructuredBiaffine {
                matrices: vec![vec![vec![rat(1, 1)]]],
                constants: vec![rat(0, 1)],
            },
            activations: vec![relu()],
        };
        let l2 = Layer {
            in_dim: 1,
            out_dim: 1,
            params: 1,
            kind: LayerKind::AffineWithBias {
                maps: vec![MultiPoly {
                    terms: vec![Term {
                        coef: rat(1, 1),
                        xs: vec![0],
                        us: vec![],
                    }],
                }],
            },
            activations: vec![identity()],
        };
        let net = Network::new(vec![l1, l2], vec![rat(1, 1)]).unwrap();
        let meta = net.validate();
        assert!(!meta.has_bias);
        assert_eq!(meta.s_tags, vec![STag::Full, STag::Empty, STag::Empty]);
    }

    #[test]
    fn config_roundtrip() {
        let net = relu_affine_net();
        let json = net.to_config_json();
        let back = Network::from_config_json(&json).unwrap();
        assert_eq!(net, back);
    }

    #[test]
    fn subject_embedding_and_projection() {
        let net = relu_affine_net();
        let subject =
            Subject::with_pins(net, vec![None, Some(rat(1, 2))]).unwrap();
        assert_eq!(subject.free_count(), 1);
        assert_eq!(
            subject.embed(&[rat(3, 1)]).unwrap(),
            vec![rat(3, 1), rat(1, 2)]
        );
        assert_eq!(
            subject.project_row(&[rat(7, 1), rat(9, 1)]),
            vec![rat(7, 1)]
        );
        // Pinning the bias slot removes bias status.
        assert!(!subject.layer_has_bias(0));
        let s2 = Subject::with_pins(subject.network.clone(), vec![Some(rat(1, 1)), None]).unwrap();
        assert!(s2.layer_has_bias(0));
    }
}
