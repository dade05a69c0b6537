use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CoordinateDnf, Hyperplane};
use crate::folding::ReflectionSequence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Act {
    /// `1` for `x ≥ 0`, else `0`.
    Heaviside,
    /// `max(0, x)`.
    Ramp,
    /// `max(0, −x)`.
    NegRamp,
    Identity,
}

impl Act {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Act::Heaviside => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Act::Ramp => x.max(0.0),
            Act::NegRamp => (-x).max(0.0),
            Act::Identity => x,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Activation {
    Uniform(Act),
    PerUnit(Vec<Act>),
}

impl Activation {
    fn get(&self, j: usize) -> Act {
        match self {
            Activation::Uniform(a) => *a,
            Activation::PerUnit(v) => v[j],
        }
    }
}

/// `σ(x·W + b)`; `W` is stored with one row per input unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub act: Activation,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
}

impl Layer {
    pub fn inputs(&self) -> usize {
        self.w.len()
    }

    pub fn outputs(&self) -> usize {
        self.b.len()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.b.clone();
        for (xi, row) in x.iter().zip(&self.w) {
            if *xi != 0.0 {
                for (o, wij) in out.iter_mut().zip(row) {
                    *o += xi * wij;
                }
            }
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.act.get(j).apply(*o);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseNetwork {
    pub input_dim: usize,
    pub layers: Vec<Layer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reflections: Option<ReflectionSequence>,
}

impl PiecewiseNetwork {
    pub fn widths(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::outputs).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let mut dim = self.input_dim;
        for l in &self.layers {
            if l.inputs() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: l.inputs() });
            }
            let out = l.outputs();
            if let Some(row) = l.w.iter().find(|r| r.len() != out) {
                return Err(Error::DimensionMismatch { expected: out, got: row.len() });
            }
            if let Activation::PerUnit(a) = &l.act {
                if a.len() != out {
                    return Err(Error::DimensionMismatch { expected: out, got: a.len() });
                }
            }
            dim = out;
        }
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let net: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        net.validate()?;
        Ok(net)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

pub fn network_forward(net: &PiecewiseNetwork, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != net.input_dim {
        return Err(Error::DimensionMismatch { expected: net.input_dim, got: y.len() });
    }
    let mut x = y.to_vec();
    for l in &net.layers {
        if l.inputs() != x.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: l.inputs() });
        }
        x = l.forward(&x);
    }
    Ok(x)
}

/// Heaviside projections, then AND gates, then one OR gate per DNF.
pub(crate) fn dnf_layers(dnfs: &[CoordinateDnf]) -> Result<Vec<Layer>> {
    let n = dnfs.first().ok_or_else(|| Error::InvalidParameter("no DNF to export".into()))?.n;
    let mut pool: Vec<Hyperplane> = Vec::new();
    let mut gates: Vec<Vec<usize>> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for (d, dnf) in dnfs.iter().enumerate() {
        dnf.check()?;
        if dnf.n != n {
            return Err(Error::DimensionMismatch { expected: n, got: dnf.n });
        }
        let remap: Vec<usize> = dnf
            .hyperplanes
            .iter()
            .map(|h| match pool.iter().position(|q| q.same_as(h, super::synth::DEDUP_TOL)) {
                Some(k) => k,
                None => {
                    pool.push(h.clone());
                    pool.len() - 1
                }
            })
            .collect();
        for t in dnf.distinct_terms() {
            gates.push(t.iter().map(|&h| remap[h]).collect());
            owner.push(d);
        }
    }
    let l1 = Layer {
        w: (0..n).map(|k| pool.iter().map(|h| h.normal[k]).collect()).collect(),
        b: pool.iter().map(|h| -h.offset).collect(),
        act: Activation::Uniform(Act::Heaviside),
        block: None,
    };
    let l2 = Layer {
        w: (0..pool.len()).map(|h| gates.iter().map(|g| if g.contains(&h) { 1.0 } else { 0.0 }).collect()).collect(),
        b: gates.iter().map(|g| -(g.len() as f64 - 0.5)).collect(),
        act: Activation::Uniform(Act::Heaviside),
        block: None,
    };
    let l3 = Layer {
        w: owner.iter().map(|&o| (0..dnfs.len()).map(|d| if d == o { 1.0 } else { 0.0 }).collect()).collect(),
        b: vec![-0.5; dnfs.len()],
        act: Activation::Uniform(Act::Heaviside),
        block: None,
    };
    Ok(vec![l1, l2, l3])
}

pub fn export_hld_network(dnfs: &[CoordinateDnf]) -> Result<PiecewiseNetwork> {
    let layers = dnf_layers(dnfs)?;
    Ok(PiecewiseNetwork { input_dim: dnfs[0].n, layers, reflections: None })
}
