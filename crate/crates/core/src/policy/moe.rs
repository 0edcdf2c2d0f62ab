//! Mixture-of-experts student encoder with an action head.
//!
//! Every expert and the gate read the flattened observation window
//! `o_{t-H+1..t}`. The gate's softmax weights mix the expert outputs into the
//! latent `z_s = Σ ω_k E_k(window)`. The action head maps `[z_s, o_t]` to 12
//! joint offsets.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::history::ObservationHistory;
use super::nn::{Activation, Linear, Mlp};
use super::{LatentSample, Policy, PolicyInput, PolicyOutput, PolicySession};
use crate::error::{ensure_finite, Error, Result};
use crate::robot::{JointArray, NUM_JOINTS};
use crate::sim::OBS_DIM;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoEArch {
    pub num_experts: usize,
    pub history: usize,
    pub obs_dim: usize,
    pub expert_hidden: Vec<usize>,
    pub gate_hidden: Vec<usize>,
    pub latent_dim: usize,
    pub head_hidden: Vec<usize>,
    pub action_dim: usize,
    pub activation: Activation,
}

impl Default for MoEArch {
    fn default() -> Self {
        MoEArch {
            num_experts: 4,
            history: 5,
            obs_dim: OBS_DIM,
            expert_hidden: vec![256, 256],
            gate_hidden: vec![256, 256],
            latent_dim: 32,
            head_hidden: vec![256, 128],
            action_dim: NUM_JOINTS,
            activation: Activation::Elu,
        }
    }
}

impl MoEArch {
    pub fn input_dim(&self) -> usize {
        self.history * self.obs_dim
    }

    pub fn expert_dims(&self) -> Vec<usize> {
        chain(self.input_dim(), &self.expert_hidden, self.latent_dim)
    }

    pub fn gate_dims(&self) -> Vec<usize> {
        chain(self.input_dim(), &self.gate_hidden, self.num_experts)
    }

    pub fn head_dims(&self) -> Vec<usize> {
        chain(self.latent_dim + self.obs_dim, &self.head_hidden, self.action_dim)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("num_experts", self.num_experts),
            ("history", self.history),
            ("obs_dim", self.obs_dim),
            ("latent_dim", self.latent_dim),
            ("action_dim", self.action_dim),
        ] {
            if v == 0 {
                return Err(Error::param(name, "must be positive"));
            }
        }
        Ok(())
    }
}

fn chain(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    std::iter::once(input).chain(hidden.iter().copied()).chain(std::iter::once(output)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoEOutput {
    pub action: Vec<f64>,
    pub latent: Vec<f64>,
    pub gate: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoEPolicy {
    pub arch: MoEArch,
    pub experts: Vec<Mlp>,
    pub gate: Mlp,
    pub head: Mlp,
}

fn check_dims(what: &str, net: &Mlp, expected: &[usize]) -> Result<()> {
    let found = net.dims();
    if found != expected {
        return Err(Error::Shape {
            what: what.to_string(),
            expected: format!("{expected:?}"),
            found: format!("{found:?}"),
        });
    }
    Ok(())
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

impl MoEPolicy {
    pub fn new(arch: MoEArch, experts: Vec<Mlp>, gate: Mlp, head: Mlp) -> Result<Self> {
        arch.validate()?;
        if experts.len() != arch.num_experts {
            return Err(Error::Shape {
                what: "expert count".into(),
                expected: arch.num_experts.to_string(),
                found: experts.len().to_string(),
            });
        }
        for (k, e) in experts.iter().enumerate() {
            check_dims(&format!("expert {k}"), e, &arch.expert_dims())?;
        }
        check_dims("gate", &gate, &arch.gate_dims())?;
        check_dims("head", &head, &arch.head_dims())?;
        Ok(MoEPolicy { arch, experts, gate, head })
    }

    /// Randomly initialized network, reproducible from `seed`.
    pub fn random(arch: MoEArch, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let experts = (0..arch.num_experts)
            .map(|_| Mlp::random(&arch.expert_dims(), arch.activation, &mut rng))
            .collect();
        let gate = Mlp::random(&arch.gate_dims(), arch.activation, &mut rng);
        let head = Mlp::random(&arch.head_dims(), arch.activation, &mut rng);
        Self::new(arch, experts, gate, head)
    }

    /// Replaces the gate's last layer with zeros so every expert gets `1/K`.
    pub fn with_uniform_gate(mut self) -> Self {
        let last = self.gate.layers.last_mut().expect("gate has layers");
        *last = Linear::zeros(last.in_dim, last.out_dim);
        self
    }

    pub fn parameter_count(&self) -> usize {
        self.experts
            .iter()
            .chain([&self.gate, &self.head])
            .flat_map(|m| &m.layers)
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    /// Gate weights for a flattened window.
    pub fn gate_weights(&self, window: &[f64]) -> Result<Vec<f64>> {
        Ok(softmax(&self.gate.forward(window)?))
    }

    /// Evaluates the network on a flattened window and the newest
    /// observation.
    pub fn forward_raw(&self, window: &[f64], current: &[f64]) -> Result<MoEOutput> {
        if current.len() != self.arch.obs_dim {
            return Err(Error::Shape {
                what: "current observation".into(),
                expected: self.arch.obs_dim.to_string(),
                found: current.len().to_string(),
            });
        }
        ensure_finite("policy input", window)?;
        ensure_finite("policy input", current)?;
        let gate = self.gate_weights(window)?;
        let mut latent = vec![0.0; self.arch.latent_dim];
        for (w, expert) in gate.iter().zip(&self.experts) {
            for (z, e) in latent.iter_mut().zip(expert.forward(window)?) {
                *z += w * e;
            }
        }
        let mut head_in = latent.clone();
        head_in.extend_from_slice(current);
        let action = self.head.forward(&head_in)?;
        ensure_finite("policy output", &action)?;
        Ok(MoEOutput { action, latent, gate })
    }

    pub fn forward(&self, hist: &ObservationHistory) -> Result<MoEOutput> {
        if hist.capacity() != self.arch.history || !hist.is_full() {
            return Err(Error::Shape {
                what: "observation history".into(),
                expected: self.arch.history.to_string(),
                found: hist.len().to_string(),
            });
        }
        let latest = hist.latest().expect("full history");
        self.forward_raw(&hist.flatten(), latest)
    }
}

/// `Σ_k (ω̄_k − 1/K)²` over a batch of gate weight rows.
pub fn load_balance_diagnostic(gates: &[Vec<f64>]) -> Result<f64> {
    let first = gates.first().ok_or(Error::Empty("gate batch"))?;
    let k = first.len();
    if k == 0 {
        return Err(Error::Empty("gate row"));
    }
    let mut mean = vec![0.0; k];
    for (j, row) in gates.iter().enumerate() {
        if row.len() != k {
            return Err(Error::Shape {
                what: format!("gate row {j}"),
                expected: k.to_string(),
                found: row.len().to_string(),
            });
        }
        let sum: f64 = row.iter().sum();
        if row.iter().any(|w| !(*w >= -1e-9)) || (sum - 1.0).abs() > 1e-6 {
            return Err(Error::param("gate batch", format!("row {j} is not on the simplex")));
        }
        for (m, w) in mean.iter_mut().zip(row) {
            *m += w;
        }
    }
    let b = gates.len() as f64;
    let uniform = 1.0 / k as f64;
    Ok(mean.iter().map(|m| (m / b - uniform).powi(2)).sum())
}

struct MoESession<'a> {
    policy: &'a MoEPolicy,
    history: ObservationHistory,
}

impl PolicySession for MoESession<'_> {
    fn act(&mut self, input: &PolicyInput<'_>) -> Result<PolicyOutput> {
        self.history.push(input.obs);
        let out = self.policy.forward(&self.history)?;
        let action: JointArray = out.action.as_slice().try_into().map_err(|_| Error::Shape {
            what: "action".into(),
            expected: NUM_JOINTS.to_string(),
            found: out.action.len().to_string(),
        })?;
        Ok(PolicyOutput {
            action,
            latent: Some(LatentSample {
                z: out.latent,
                gate: out.gate,
            }),
        })
    }
}

impl Policy for MoEPolicy {
    fn name(&self) -> String {
        format!("moe(K={}, H={})", self.arch.num_experts, self.arch.history)
    }

    fn session(&self, _control_dt: f64) -> Result<Box<dyn PolicySession + '_>> {
        if self.arch.obs_dim != OBS_DIM || self.arch.action_dim != NUM_JOINTS {
            return Err(Error::Shape {
                what: "policy io".into(),
                expected: format!("{OBS_DIM} -> {NUM_JOINTS}"),
                found: format!("{} -> {}", self.arch.obs_dim, self.arch.action_dim),
            });
        }
        Ok(Box::new(MoESession {
            policy: self,
            history: ObservationHistory::new(self.arch.history)?,
        }))
    }
}
