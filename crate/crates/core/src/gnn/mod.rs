//! Native inference for the screening networks: two message-passing layers
//! (GCN, GraphSAGE or the pairwise "LR" rule) followed by two dense layers.

mod features;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{StaticGraph, VertexId};

pub use features::{extract_features, FEATURES};

pub const FORMAT: &str = "mwis-gnn";
pub const VERSION: u32 = 1;
pub const HIDDEN: usize = 16;
/// Vertices whose output is strictly greater than this are suggested.
pub const THRESHOLD: f64 = 0.5;

#[derive(Debug, thiserror::Error)]
pub enum GnnError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model file: {0}")]
    Format(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols));
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Gcn,
    #[serde(rename = "graphsage")]
    Sage,
    Lr,
}

impl Architecture {
    pub const ALL: [Architecture; 3] = [Architecture::Gcn, Architecture::Sage, Architecture::Lr];

    pub fn name(self) -> &'static str {
        match self {
            Architecture::Gcn => "gcn",
            Architecture::Sage => "graphsage",
            Architecture::Lr => "lr",
        }
    }

    /// Input width of a message-passing layer fed with `dim`-wide states.
    fn mp_input(self, dim: usize) -> usize {
        match self {
            Architecture::Gcn => dim,
            Architecture::Sage | Architecture::Lr => 2 * dim,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Architecture {
    type Err = GnnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| GnnError::Format(format!("unknown architecture {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    None,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::None => x,
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    MessagePassing,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub kind: LayerKind,
    #[serde(rename = "in")]
    pub input: usize,
    #[serde(rename = "out")]
    pub output: usize,
    pub activation: Activation,
    /// `output × input`, row-major.
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn zeros(kind: LayerKind, input: usize, output: usize, activation: Activation) -> Self {
        Layer {
            kind,
            input,
            output,
            activation,
            weight: vec![0.0; input * output],
            bias: vec![0.0; output],
        }
    }

    /// act(W x + b), written into `out`.
    fn affine(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.input);
        for (o, (row, b)) in out
            .iter_mut()
            .zip(self.weight.chunks_exact(self.input).zip(&self.bias))
        {
            let z: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b;
            *o = self.activation.apply(z);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnnModel {
    pub format: String,
    pub version: u32,
    pub architecture: Architecture,
    pub input_dim: usize,
    pub hidden_dim: usize,
    /// Feed the last dense layer the full concatenation instead of only the
    /// previous layer's output.
    #[serde(default)]
    pub dense4_concat: bool,
    pub layers: Vec<Layer>,
}

impl GnnModel {
    /// All-zero model of the standard shape; every output is exactly 0.5.
    pub fn zeros(architecture: Architecture, input_dim: usize, hidden_dim: usize) -> Self {
        let concat = input_dim + 2 * hidden_dim;
        GnnModel {
            format: FORMAT.into(),
            version: VERSION,
            architecture,
            input_dim,
            hidden_dim,
            dense4_concat: false,
            layers: vec![
                Layer::zeros(
                    LayerKind::MessagePassing,
                    architecture.mp_input(input_dim),
                    hidden_dim,
                    Activation::Relu,
                ),
                Layer::zeros(
                    LayerKind::MessagePassing,
                    architecture.mp_input(hidden_dim),
                    hidden_dim,
                    Activation::Relu,
                ),
                Layer::zeros(LayerKind::Dense, concat, hidden_dim, Activation::Relu),
                Layer::zeros(LayerKind::Dense, hidden_dim, 1, Activation::Sigmoid),
            ],
        }
    }

    /// Standard-shape model with uniform coefficients in [-scale, scale].
    pub fn random(
        architecture: Architecture,
        input_dim: usize,
        hidden_dim: usize,
        scale: f64,
        rng: &mut impl rand::Rng,
    ) -> Self {
        let mut m = GnnModel::zeros(architecture, input_dim, hidden_dim);
        for layer in &mut m.layers {
            for x in layer.weight.iter_mut().chain(layer.bias.iter_mut()) {
                *x = rng.gen_range(-scale..=scale);
            }
        }
        m
    }

    /// Model whose output is the same on every vertex: sigmoid(`logit`).
    pub fn constant(architecture: Architecture, logit: f64) -> Self {
        let mut m = GnnModel::zeros(architecture, FEATURES, HIDDEN);
        m.layers[3].bias[0] = logit;
        m
    }

    fn concat_dim(&self) -> usize {
        self.input_dim + 2 * self.hidden_dim
    }

    pub fn validate(&self) -> Result<(), GnnError> {
        if self.format != FORMAT {
            return Err(GnnError::Format(format!("format tag {:?}", self.format)));
        }
        if self.version != VERSION {
            return Err(GnnError::Format(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.layers.len() != 4 {
            return Err(GnnError::Format(format!(
                "{} expects 4 layers (2 message-passing, 2 dense), found {}",
                self.architecture,
                self.layers.len()
            )));
        }
        let (a, h) = (self.architecture, self.hidden_dim);
        let d3 = self.layers[2].output;
        let d4_in = if self.dense4_concat {
            self.concat_dim() + d3
        } else {
            d3
        };
        let plan = [
            (LayerKind::MessagePassing, a.mp_input(self.input_dim), h),
            (LayerKind::MessagePassing, a.mp_input(h), h),
            (LayerKind::Dense, self.concat_dim(), d3),
            (LayerKind::Dense, d4_in, 1),
        ];
        for (i, (layer, (kind, input, output))) in self.layers.iter().zip(plan).enumerate() {
            if layer.kind != kind || layer.input != input || layer.output != output {
                return Err(GnnError::Format(format!(
                    "layer {i} of {a}: expected {kind:?} {input}->{output}, found {:?} {}->{}",
                    layer.kind, layer.input, layer.output
                )));
            }
            if layer.weight.len() != input * output || layer.bias.len() != output {
                return Err(GnnError::Format(format!(
                    "layer {i}: coefficient count does not match {input}x{output}"
                )));
            }
        }
        if self.layers[3].activation != Activation::Sigmoid {
            return Err(GnnError::Format("output activation must be sigmoid".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, GnnError> {
        let m: GnnModel = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn load(path: &Path) -> Result<Self, GnnError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), GnnError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

fn message_passing(arch: Architecture, layer: &Layer, g: &StaticGraph, h: &Matrix) -> Matrix {
    let d = h.cols;
    let mut out = Matrix::zeros(h.rows, layer.output);
    let norm: Vec<f64> = (0..g.n())
        .map(|v| 1.0 / ((g.degree(v) + 1) as f64).sqrt())
        .collect();
    out.data
        .par_chunks_mut(layer.output.max(1))
        .enumerate()
        .for_each(|(u, row)| {
            let nbrs = g.neighbors(u);
            match arch {
                Architecture::Gcn => {
                    let mut t = vec![0.0; d];
                    for v in nbrs.iter().copied().chain([u]) {
                        for (t, x) in t.iter_mut().zip(h.row(v)) {
                            *t += x * norm[v];
                        }
                    }
                    layer.affine(&t, row);
                }
                Architecture::Sage => {
                    let mut x = vec![0.0; 2 * d];
                    x[..d].copy_from_slice(h.row(u));
                    if !nbrs.is_empty() {
                        for &v in nbrs {
                            for (t, y) in x[d..].iter_mut().zip(h.row(v)) {
                                *t += y;
                            }
                        }
                        for t in &mut x[d..] {
                            *t /= nbrs.len() as f64;
                        }
                    }
                    layer.affine(&x, row);
                }
                Architecture::Lr => {
                    if nbrs.is_empty() {
                        return;
                    }
                    let mut x = vec![0.0; 2 * d];
                    x[..d].copy_from_slice(h.row(u));
                    let mut msg = vec![0.0; layer.output];
                    for &v in nbrs {
                        x[d..].copy_from_slice(h.row(v));
                        layer.affine(&x, &mut msg);
                        for (o, m) in row.iter_mut().zip(&msg) {
                            *o += m;
                        }
                    }
                    for o in row.iter_mut() {
                        *o /= nbrs.len() as f64;
                    }
                }
            }
        });
    out
}

fn dense(layer: &Layer, parts: &[&Matrix]) -> Matrix {
    let rows = parts[0].rows;
    let mut out = Matrix::zeros(rows, layer.output);
    let mut x = Vec::with_capacity(layer.input);
    for u in 0..rows {
        x.clear();
        for p in parts {
            x.extend_from_slice(p.row(u));
        }
        layer.affine(&x, out.row_mut(u));
    }
    out
}

/// Per-vertex output in (0, 1).
pub fn forward(model: &GnnModel, g: &StaticGraph, feats: &Matrix) -> Result<Vec<f64>, GnnError> {
    if feats.rows != g.n() || feats.cols != model.input_dim {
        return Err(GnnError::Dimension(format!(
            "features are {}x{}, model expects {}x{}",
            feats.rows,
            feats.cols,
            g.n(),
            model.input_dim
        )));
    }
    let [l1, l2, l3, l4] = &model.layers[..] else {
        return Err(GnnError::Format("expected 4 layers".into()));
    };
    let h1 = message_passing(model.architecture, l1, g, feats);
    let h2 = message_passing(model.architecture, l2, g, &h1);
    let h3 = dense(l3, &[feats, &h1, &h2]);
    let out = if model.dense4_concat {
        dense(l4, &[feats, &h1, &h2, &h3])
    } else {
        dense(l4, &[&h3])
    };
    Ok(out.data)
}

/// Vertices whose output exceeds the threshold.
pub fn screen(model: &GnnModel, g: &StaticGraph) -> Result<Vec<VertexId>, GnnError> {
    let feats = extract_features(g);
    let out = forward(model, g, &feats)?;
    Ok((0..g.n()).filter(|&v| out[v] > THRESHOLD).collect())
}
