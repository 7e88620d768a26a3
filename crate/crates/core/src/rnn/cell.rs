//! Recurrent cells, forward rollout and backpropagation through time.
//!
//! The vanilla cell follows `x_t = W·tanh(x_{t−1}) + W_in·u_t + b` with the
//! nonlinearity applied to the previous state inside the recurrence. LSTM
//! and GRU cells use sigmoid gates and tanh candidates. All three read out
//! linearly from the final hidden state.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Task;
use crate::matrix::{Matrix, MatrixError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Rnn,
    Lstm,
    Gru,
}

impl CellKind {
    /// Gate order used everywhere (storage, reports, file names).
    pub fn gate_names(self) -> &'static [&'static str] {
        match self {
            CellKind::Rnn => &["recurrent"],
            CellKind::Lstm => &["input", "forget", "cell", "output"],
            CellKind::Gru => &["update", "reset", "candidate"],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellKind::Rnn => "rnn",
            CellKind::Lstm => "lstm",
            CellKind::Gru => "gru",
        }
    }
}

impl std::str::FromStr for CellKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rnn" => Ok(CellKind::Rnn),
            "lstm" => Ok(CellKind::Lstm),
            "gru" => Ok(CellKind::Gru),
            other => Err(format!("unknown cell kind `{other}` (expected rnn, lstm or gru)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CellError {
    #[error("sequence length {len} is not a multiple of the input width {input}")]
    RaggedSequence { len: usize, input: usize },
    #[error("empty sequence")]
    EmptySequence,
    #[error("target does not match the task")]
    TargetMismatch,
    #[error("state Jacobians are only defined here for the vanilla cell")]
    NotVanilla,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Parameters of one gate: recurrent matrix, input matrix and bias.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    /// `hidden × hidden`, row-major.
    pub recurrent: Vec<f64>,
    /// `hidden × input`, row-major.
    pub input: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub kind: CellKind,
    pub hidden: usize,
    pub input: usize,
    pub output: usize,
    pub gates: Vec<Gate>,
    /// `output × hidden`, row-major.
    pub readout: Vec<f64>,
    pub readout_bias: Vec<f64>,
}

impl CellParams {
    /// All-zero parameters of the given shape.
    pub fn zeros(kind: CellKind, hidden: usize, input: usize, output: usize) -> Self {
        let gates = kind
            .gate_names()
            .iter()
            .map(|name| Gate {
                name: (*name).to_string(),
                recurrent: vec![0.0; hidden * hidden],
                input: vec![0.0; hidden * input],
                bias: vec![0.0; hidden],
            })
            .collect();
        Self {
            kind,
            hidden,
            input,
            output,
            gates,
            readout: vec![0.0; output * hidden],
            readout_bias: vec![0.0; output],
        }
    }

    /// Uniform weights in `±1/√fan_in` (fan-in = number of columns), zero
    /// biases except a unit LSTM forget bias.
    pub fn init(kind: CellKind, hidden: usize, input: usize, output: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut p = Self::zeros(kind, hidden, input, output);
        let mut fill = |buf: &mut [f64], fan_in: usize| {
            let k = 1.0 / (fan_in as f64).sqrt();
            buf.iter_mut().for_each(|x| *x = rng.gen_range(-k..k));
        };
        for gate in &mut p.gates {
            fill(&mut gate.recurrent, hidden);
            fill(&mut gate.input, input);
        }
        fill(&mut p.readout, hidden);
        if kind == CellKind::Lstm {
            p.gates[1].bias.iter_mut().for_each(|b| *b = 1.0);
        }
        p
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.kind, self.hidden, self.input, self.output)
    }

    /// Every parameter buffer in a fixed order.
    pub fn buffers(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::with_capacity(3 * self.gates.len() + 2);
        for g in &self.gates {
            out.push(&g.recurrent);
            out.push(&g.input);
            out.push(&g.bias);
        }
        out.push(&self.readout);
        out.push(&self.readout_bias);
        out
    }

    pub fn buffers_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::with_capacity(3 * self.gates.len() + 2);
        for g in &mut self.gates {
            out.push(&mut g.recurrent);
            out.push(&mut g.input);
            out.push(&mut g.bias);
        }
        out.push(&mut self.readout);
        out.push(&mut self.readout_bias);
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.buffers().iter().map(|b| b.len()).sum()
    }

    /// Euclidean norm over all parameters.
    pub fn global_norm(&self) -> f64 {
        self.buffers()
            .iter()
            .flat_map(|b| b.iter())
            .map(|x| x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.buffers().iter().all(|b| b.iter().all(|x| x.is_finite()))
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &CellParams, scale: f64) {
        for (dst, src) in self.buffers_mut().into_iter().zip(other.buffers()) {
            dst.iter_mut().zip(src).for_each(|(d, s)| *d += scale * s);
        }
    }

    pub fn scale_all(&mut self, factor: f64) {
        for buf in self.buffers_mut() {
            buf.iter_mut().for_each(|x| *x *= factor);
        }
    }

    /// Recurrent matrix of each gate, in gate order.
    pub fn recurrent_matrices(&self) -> Vec<(String, Matrix)> {
        self.gates
            .iter()
            .map(|g| {
                let m = Matrix::from_real(self.hidden, self.hidden, &g.recurrent)
                    .expect("cell parameters are finite");
                (g.name.clone(), m)
            })
            .collect()
    }
}

/// Named recurrent matrices of a cell: one for RNN, four for LSTM, three
/// for GRU, in [`CellKind::gate_names`] order.
pub fn extract_recurrent_matrices(cell: &CellParams) -> Vec<(String, Matrix)> {
    cell.recurrent_matrices()
}

/// Regression value for the adding task or class label for MNIST.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Value(f64),
    Class(usize),
}

/// Hidden states `x_1..x_T` and the readout of the final state.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    pub states: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

// ---------------------------------------------------------------------------
// dense helpers (row-major)

/// `out += M x` for `M` with `cols = x.len()`.
fn matvec_acc(out: &mut [f64], m: &[f64], x: &[f64]) {
    let cols = x.len();
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += Mᵀ y` for `M` with `rows = y.len()`.
fn matvec_t_acc(out: &mut [f64], m: &[f64], y: &[f64]) {
    let cols = out.len();
    for (row, yi) in m.chunks_exact(cols).zip(y) {
        if *yi != 0.0 {
            out.iter_mut().zip(row).for_each(|(o, a)| *o += a * yi);
        }
    }
}

/// `g += a bᵀ`.
fn outer_acc(g: &mut [f64], a: &[f64], b: &[f64]) {
    let cols = b.len();
    for (row, ai) in g.chunks_exact_mut(cols).zip(a) {
        if *ai != 0.0 {
            row.iter_mut().zip(b).for_each(|(r, bj)| *r += ai * bj);
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn preactivation(gate: &Gate, h: &[f64], u: &[f64]) -> Vec<f64> {
    let mut a = gate.bias.clone();
    matvec_acc(&mut a, &gate.recurrent, h);
    matvec_acc(&mut a, &gate.input, u);
    a
}

// ---------------------------------------------------------------------------
// per-kind step caches

struct RnnStep {
    /// `tanh(x_{t−1})`.
    act_prev: Vec<f64>,
}

struct LstmStep {
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    tanh_c: Vec<f64>,
}

struct GruStep {
    h_prev: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    n: Vec<f64>,
    rh: Vec<f64>,
}

enum Trace {
    Rnn(Vec<RnnStep>),
    Lstm(Vec<LstmStep>),
    Gru(Vec<GruStep>),
}

fn split_steps<'a>(cell: &CellParams, seq: &'a [f64]) -> Result<std::slice::ChunksExact<'a, f64>, CellError> {
    if seq.is_empty() {
        return Err(CellError::EmptySequence);
    }
    if !seq.len().is_multiple_of(cell.input) {
        return Err(CellError::RaggedSequence {
            len: seq.len(),
            input: cell.input,
        });
    }
    Ok(seq.chunks_exact(cell.input))
}

fn rollout(cell: &CellParams, seq: &[f64]) -> Result<(Vec<Vec<f64>>, Trace), CellError> {
    let h = cell.hidden;
    let steps = split_steps(cell, seq)?;
    let mut states = Vec::with_capacity(steps.len());
    let trace = match cell.kind {
        CellKind::Rnn => {
            let gate = &cell.gates[0];
            let mut x = vec![0.0f64; h];
            let mut cache = Vec::with_capacity(steps.len());
            for u in steps {
                let act_prev: Vec<f64> = x.iter().map(|v| v.tanh()).collect();
                x = preactivation(gate, &act_prev, u);
                cache.push(RnnStep { act_prev });
                states.push(x.clone());
            }
            Trace::Rnn(cache)
        }
        CellKind::Lstm => {
            let mut hs = vec![0.0; h];
            let mut c = vec![0.0; h];
            let mut cache = Vec::with_capacity(steps.len());
            for u in steps {
                let i: Vec<f64> = preactivation(&cell.gates[0], &hs, u).into_iter().map(sigmoid).collect();
                let f: Vec<f64> = preactivation(&cell.gates[1], &hs, u).into_iter().map(sigmoid).collect();
                let g: Vec<f64> = preactivation(&cell.gates[2], &hs, u).into_iter().map(f64::tanh).collect();
                let o: Vec<f64> = preactivation(&cell.gates[3], &hs, u).into_iter().map(sigmoid).collect();
                let c_new: Vec<f64> = (0..h).map(|k| f[k] * c[k] + i[k] * g[k]).collect();
                let tanh_c: Vec<f64> = c_new.iter().map(|v| v.tanh()).collect();
                let h_new: Vec<f64> = (0..h).map(|k| o[k] * tanh_c[k]).collect();
                cache.push(LstmStep {
                    h_prev: std::mem::replace(&mut hs, h_new),
                    c_prev: std::mem::replace(&mut c, c_new),
                    i,
                    f,
                    g,
                    o,
                    tanh_c,
                });
                states.push(hs.clone());
            }
            Trace::Lstm(cache)
        }
        CellKind::Gru => {
            let mut hs = vec![0.0; h];
            let mut cache = Vec::with_capacity(steps.len());
            for u in steps {
                let z: Vec<f64> = preactivation(&cell.gates[0], &hs, u).into_iter().map(sigmoid).collect();
                let r: Vec<f64> = preactivation(&cell.gates[1], &hs, u).into_iter().map(sigmoid).collect();
                let rh: Vec<f64> = r.iter().zip(&hs).map(|(a, b)| a * b).collect();
                let n: Vec<f64> = preactivation(&cell.gates[2], &rh, u).into_iter().map(f64::tanh).collect();
                let h_new: Vec<f64> = (0..h).map(|k| (1.0 - z[k]) * n[k] + z[k] * hs[k]).collect();
                cache.push(GruStep {
                    h_prev: std::mem::replace(&mut hs, h_new),
                    z,
                    r,
                    n,
                    rh,
                });
                states.push(hs.clone());
            }
            Trace::Gru(cache)
        }
    };
    Ok((states, trace))
}

fn readout(cell: &CellParams, state: &[f64]) -> Vec<f64> {
    let mut y = cell.readout_bias.clone();
    matvec_acc(&mut y, &cell.readout, state);
    y
}

/// Runs the cell over `seq` (`T × input`, row-major) from a zero state.
pub fn forward(cell: &CellParams, seq: &[f64]) -> Result<ForwardOutput, CellError> {
    let (states, _) = rollout(cell, seq)?;
    let output = readout(cell, states.last().expect("non-empty sequence"));
    Ok(ForwardOutput { states, output })
}

/// Class probabilities from logits.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Squared error for the adding task, softmax cross-entropy for MNIST.
pub fn loss(output: &[f64], target: Target, task: Task) -> Result<f64, CellError> {
    match (task, target) {
        (Task::Adding, Target::Value(t)) if output.len() == 1 => Ok((output[0] - t).powi(2)),
        (Task::SeqMnist, Target::Class(c)) if c < output.len() => {
            let max = output.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = max + output.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
            Ok(lse - output[c])
        }
        _ => Err(CellError::TargetMismatch),
    }
}

fn loss_gradient(output: &[f64], target: Target, task: Task) -> Result<Vec<f64>, CellError> {
    match (task, target) {
        (Task::Adding, Target::Value(t)) if output.len() == 1 => Ok(vec![2.0 * (output[0] - t)]),
        (Task::SeqMnist, Target::Class(c)) if c < output.len() => {
            let mut p = softmax(output);
            p[c] -= 1.0;
            Ok(p)
        }
        _ => Err(CellError::TargetMismatch),
    }
}

/// Loss of one sequence and its exact gradient with respect to every
/// parameter, accumulated into `grad`.
pub fn backward_into(
    cell: &CellParams,
    seq: &[f64],
    target: Target,
    task: Task,
    grad: &mut CellParams,
) -> Result<f64, CellError> {
    let (states, trace) = rollout(cell, seq)?;
    let last = states.last().expect("non-empty sequence");
    let y = readout(cell, last);
    let value = loss(&y, target, task)?;
    let dy = loss_gradient(&y, target, task)?;

    outer_acc(&mut grad.readout, &dy, last);
    grad.readout_bias.iter_mut().zip(&dy).for_each(|(g, d)| *g += d);
    let h = cell.hidden;
    let mut dh = vec![0.0; h];
    matvec_t_acc(&mut dh, &cell.readout, &dy);

    let inputs: Vec<&[f64]> = seq.chunks_exact(cell.input).collect();
    match trace {
        Trace::Rnn(steps) => {
            let w = &cell.gates[0];
            for (t, step) in steps.iter().enumerate().rev() {
                let gg = &mut grad.gates[0];
                outer_acc(&mut gg.recurrent, &dh, &step.act_prev);
                outer_acc(&mut gg.input, &dh, inputs[t]);
                gg.bias.iter_mut().zip(&dh).for_each(|(g, d)| *g += d);
                let mut dprev = vec![0.0; h];
                matvec_t_acc(&mut dprev, &w.recurrent, &dh);
                for (d, a) in dprev.iter_mut().zip(&step.act_prev) {
                    *d *= 1.0 - a * a;
                }
                dh = dprev;
            }
        }
        Trace::Lstm(steps) => {
            let mut dc = vec![0.0; h];
            for (t, s) in steps.iter().enumerate().rev() {
                let mut da = vec![vec![0.0; h]; 4];
                for k in 0..h {
                    let d_o = dh[k] * s.tanh_c[k];
                    dc[k] += dh[k] * s.o[k] * (1.0 - s.tanh_c[k] * s.tanh_c[k]);
                    let d_i = dc[k] * s.g[k];
                    let d_g = dc[k] * s.i[k];
                    let d_f = dc[k] * s.c_prev[k];
                    da[0][k] = d_i * s.i[k] * (1.0 - s.i[k]);
                    da[1][k] = d_f * s.f[k] * (1.0 - s.f[k]);
                    da[2][k] = d_g * (1.0 - s.g[k] * s.g[k]);
                    da[3][k] = d_o * s.o[k] * (1.0 - s.o[k]);
                    dc[k] *= s.f[k];
                }
                let mut dprev = vec![0.0; h];
                for (gi, dak) in da.iter().enumerate() {
                    let gg = &mut grad.gates[gi];
                    outer_acc(&mut gg.recurrent, dak, &s.h_prev);
                    outer_acc(&mut gg.input, dak, inputs[t]);
                    gg.bias.iter_mut().zip(dak).for_each(|(g, d)| *g += d);
                    matvec_t_acc(&mut dprev, &cell.gates[gi].recurrent, dak);
                }
                dh = dprev;
            }
        }
        Trace::Gru(steps) => {
            for (t, s) in steps.iter().enumerate().rev() {
                let mut dprev = vec![0.0; h];
                let mut daz = vec![0.0; h];
                let mut dan = vec![0.0; h];
                for k in 0..h {
                    let dz = dh[k] * (s.h_prev[k] - s.n[k]);
                    let dn = dh[k] * (1.0 - s.z[k]);
                    dprev[k] = dh[k] * s.z[k];
                    daz[k] = dz * s.z[k] * (1.0 - s.z[k]);
                    dan[k] = dn * (1.0 - s.n[k] * s.n[k]);
                }
                let gn = &mut grad.gates[2];
                outer_acc(&mut gn.recurrent, &dan, &s.rh);
                outer_acc(&mut gn.input, &dan, inputs[t]);
                gn.bias.iter_mut().zip(&dan).for_each(|(g, d)| *g += d);
                let mut drh = vec![0.0; h];
                matvec_t_acc(&mut drh, &cell.gates[2].recurrent, &dan);
                let mut dar = vec![0.0; h];
                for k in 0..h {
                    dar[k] = drh[k] * s.h_prev[k] * s.r[k] * (1.0 - s.r[k]);
                    dprev[k] += drh[k] * s.r[k];
                }
                for (gi, dak) in [(0usize, &daz), (1, &dar)] {
                    let gg = &mut grad.gates[gi];
                    outer_acc(&mut gg.recurrent, dak, &s.h_prev);
                    outer_acc(&mut gg.input, dak, inputs[t]);
                    gg.bias.iter_mut().zip(dak.iter()).for_each(|(g, d)| *g += d);
                    matvec_t_acc(&mut dprev, &cell.gates[gi].recurrent, dak);
                }
                dh = dprev;
            }
        }
    }
    Ok(value)
}

/// Gradient of the loss of a single sequence.
pub fn backward(cell: &CellParams, seq: &[f64], target: Target, task: Task) -> Result<(f64, CellParams), CellError> {
    let mut grad = cell.zeros_like();
    let value = backward_into(cell, seq, target, task, &mut grad)?;
    Ok((value, grad))
}

/// For the vanilla cell, `‖∂x_T/∂x_k‖₂` for `k = T−1, T−2, …, 0`, where
/// `∂x_i/∂x_{i−1} = W · diag(tanh'(x_{i−1}))`. Entry `m` spans `m + 1` steps.
pub fn state_jacobian_norms(cell: &CellParams, seq: &[f64]) -> Result<Vec<f64>, CellError> {
    if cell.kind != CellKind::Rnn {
        return Err(CellError::NotVanilla);
    }
    let (_, trace) = rollout(cell, seq)?;
    let Trace::Rnn(steps) = trace else {
        unreachable!("vanilla rollout")
    };
    let h = cell.hidden;
    let w = Matrix::from_real(h, h, &cell.gates[0].recurrent)?;
    let mut product = Matrix::identity(h);
    let mut norms = Vec::with_capacity(steps.len());
    for step in steps.iter().rev() {
        let deriv: Vec<f64> = step.act_prev.iter().map(|a| 1.0 - a * a).collect();
        let local = Matrix::from_fn(h, h, |i, j| w.get(i, j) * deriv[j])?;
        product = &product * &local;
        norms.push(product.two_norm()?);
    }
    Ok(norms)
}
