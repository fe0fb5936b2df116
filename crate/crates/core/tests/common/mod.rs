#![allow(dead_code, clippy::needless_range_loop)]

use mwis_core::gnn::{Activation, Architecture, GnnModel, LayerKind};
use mwis_core::graph::{StaticGraph, VertexId};
use mwis_core::scheduler::Screener;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// G(n, p) with weights uniform in `lo..=hi`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, lo: i64, hi: i64) -> StaticGraph {
    let w = (0..n).map(|_| rng.gen_range(lo..=hi)).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    StaticGraph::from_edges(w, &edges).unwrap()
}

/// Maximum weight over all vertex subsets, by bitmask.
pub fn brute_force(g: &StaticGraph) -> i64 {
    let n = g.n();
    assert!(n <= 24);
    let adj: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | 1 << u))
        .collect();
    let mut best = 0;
    for mask in 0u32..1 << n {
        let mut ok = true;
        let mut w = 0;
        for v in 0..n {
            if mask >> v & 1 == 1 {
                if adj[v] & mask != 0 {
                    ok = false;
                    break;
                }
                w += g.weight(v);
            }
        }
        if ok {
            best = best.max(w);
        }
    }
    best
}

pub fn independent(g: &StaticGraph, set: &[VertexId]) -> bool {
    set.iter()
        .all(|&a| set.iter().all(|&b| a == b || !g.neighbors(a).contains(&b)))
}

/// Screener that suggests each vertex with a fixed probability.
#[derive(Clone)]
pub struct Coin {
    pub seed: u64,
    pub p: f64,
}

impl Screener for Coin {
    fn suggest(&self, g: &StaticGraph) -> Vec<VertexId> {
        let mut r = rng(self.seed ^ g.n() as u64 ^ (g.m() as u64) << 20);
        (0..g.n()).filter(|_| r.gen_bool(self.p)).collect()
    }
}

/// Eight features per vertex written out from their definitions.
pub fn reference_features(g: &StaticGraph) -> Vec<Vec<f64>> {
    (0..g.n())
        .map(|v| {
            let nb = g.neighbors(v);
            if nb.is_empty() {
                let mut f = vec![0.0; 8];
                f[0] = g.weight(v) as f64;
                return f;
            }
            let mut sum_w = 0.0;
            let mut min_w = f64::MAX;
            let mut max_w = f64::MIN;
            let mut sum_d = 0.0;
            let mut min_d = f64::MAX;
            let mut max_d = f64::MIN;
            for &u in nb {
                let w = g.weight(u) as f64;
                let d = g.neighbors(u).len() as f64;
                sum_w += w;
                min_w = min_w.min(w);
                max_w = max_w.max(w);
                sum_d += d;
                min_d = min_d.min(d);
                max_d = max_d.max(d);
            }
            vec![
                g.weight(v) as f64,
                sum_w,
                min_w,
                max_w,
                nb.len() as f64,
                sum_d / nb.len() as f64,
                min_d,
                max_d,
            ]
        })
        .collect()
}

fn act(a: Activation, x: f64) -> f64 {
    match a {
        Activation::Relu => {
            if x > 0.0 {
                x
            } else {
                0.0
            }
        }
        Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        Activation::None => x,
    }
}

/// σ(W x + b) for one layer, row-major W.
fn layer_apply(model: &GnnModel, l: usize, x: &[f64]) -> Vec<f64> {
    let layer = &model.layers[l];
    assert_eq!(x.len(), layer.input);
    let mut y = Vec::new();
    for o in 0..layer.output {
        let mut s = layer.bias[o];
        for i in 0..layer.input {
            s += layer.weight[o * layer.input + i] * x[i];
        }
        y.push(act(layer.activation, s));
    }
    y
}

fn reference_mp(model: &GnnModel, l: usize, g: &StaticGraph, h: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let out = model.layers[l].output;
    (0..g.n())
        .map(|u| {
            let nb = g.neighbors(u);
            match model.architecture {
                Architecture::Gcn => {
                    let mut t = vec![0.0; h[u].len()];
                    let mut closed: Vec<usize> = nb.to_vec();
                    closed.push(u);
                    for v in closed {
                        let scale = ((g.neighbors(v).len() + 1) as f64).sqrt();
                        for k in 0..t.len() {
                            t[k] += h[v][k] / scale;
                        }
                    }
                    layer_apply(model, l, &t)
                }
                Architecture::Sage => {
                    let mut mean = vec![0.0; h[u].len()];
                    for &v in nb {
                        for k in 0..mean.len() {
                            mean[k] += h[v][k] / nb.len() as f64;
                        }
                    }
                    let x: Vec<f64> = h[u].iter().chain(&mean).copied().collect();
                    layer_apply(model, l, &x)
                }
                Architecture::Lr => {
                    let mut acc = vec![0.0; out];
                    for &v in nb {
                        let x: Vec<f64> = h[u].iter().chain(&h[v]).copied().collect();
                        let m = layer_apply(model, l, &x);
                        for k in 0..out {
                            acc[k] += m[k] / nb.len() as f64;
                        }
                    }
                    acc
                }
            }
        })
        .collect()
}

/// Scalar forward pass straight from the propagation rules.
pub fn reference_forward(model: &GnnModel, g: &StaticGraph) -> Vec<f64> {
    assert_eq!(model.layers[0].kind, LayerKind::MessagePassing);
    let x = reference_features(g);
    let h1 = reference_mp(model, 0, g, &x);
    let h2 = reference_mp(model, 1, g, &h1);
    (0..g.n())
        .map(|u| {
            let cat: Vec<f64> = x[u].iter().chain(&h1[u]).chain(&h2[u]).copied().collect();
            let h3 = layer_apply(model, 2, &cat);
            let last = if model.dense4_concat {
                cat.iter().chain(&h3).copied().collect()
            } else {
                h3
            };
            layer_apply(model, 3, &last)[0]
        })
        .collect()
}
