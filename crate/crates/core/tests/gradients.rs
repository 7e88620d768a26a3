use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specto_core::pseudospectrum::jacobian_norm_bound_check;
use specto_core::rnn::{backward, forward, loss, state_jacobian_norms, CellKind, CellParams, Target, Task};
use specto_core::Matrix;

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-4;
/// Components whose exact and numerical gradients are both below this are
/// compared absolutely; central differences cannot resolve them relatively.
const FLOOR: f64 = 1e-6;

fn objective(cell: &CellParams, seq: &[f64], target: Target, task: Task) -> f64 {
    loss(&forward(cell, seq).unwrap().output, target, task).unwrap()
}

/// Largest componentwise relative error between BPTT and central differences.
fn max_relative_error(cell: &CellParams, seq: &[f64], target: Target, task: Task) -> f64 {
    let (_, grad) = backward(cell, seq, target, task).unwrap();
    let exact: Vec<f64> = grad.buffers().into_iter().flatten().copied().collect();
    let mut probe = cell.clone();
    let mut worst = 0.0f64;
    let mut k = 0;
    let n_buffers = probe.buffers().len();
    for b in 0..n_buffers {
        let len = probe.buffers()[b].len();
        for i in 0..len {
            let orig = probe.buffers()[b][i];
            probe.buffers_mut()[b][i] = orig + STEP;
            let up = objective(&probe, seq, target, task);
            probe.buffers_mut()[b][i] = orig - STEP;
            let down = objective(&probe, seq, target, task);
            probe.buffers_mut()[b][i] = orig;
            let numeric = (up - down) / (2.0 * STEP);
            let scale = exact[k].abs().max(numeric.abs()).max(FLOOR);
            let rel = (exact[k] - numeric).abs() / scale;
            worst = worst.max(rel);
            k += 1;
        }
    }
    assert_eq!(k, exact.len());
    worst
}

fn random_case(kind: CellKind, task: Task, seed: u64) -> (CellParams, Vec<f64>, Target) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = rng.gen_range(2..=8);
    let input = rng.gen_range(1..=3);
    let steps = rng.gen_range(2..=10);
    let output = match task {
        Task::Adding => 1,
        Task::SeqMnist => 4,
    };
    let mut cell = CellParams::init(kind, hidden, input, output, &mut rng);
    for buf in cell.buffers_mut() {
        buf.iter_mut().for_each(|x| *x += rng.gen_range(-0.3..0.3));
    }
    let seq: Vec<f64> = (0..steps * input).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let target = match task {
        Task::Adding => Target::Value(rng.gen_range(0.0..2.0)),
        Task::SeqMnist => Target::Class(rng.gen_range(0..output)),
    };
    (cell, seq, target)
}

#[test]
fn bptt_matches_finite_differences() {
    for kind in [CellKind::Rnn, CellKind::Lstm, CellKind::Gru] {
        for task in [Task::Adding, Task::SeqMnist] {
            for seed in 0..5 {
                let (cell, seq, target) = random_case(kind, task, seed);
                let err = max_relative_error(&cell, &seq, target, task);
                assert!(err <= TOL, "{kind:?} {task:?} seed {seed}: {err:e}");
            }
        }
    }
}

#[test]
fn exact_fit_has_zero_gradient() {
    for kind in [CellKind::Rnn, CellKind::Lstm, CellKind::Gru] {
        let (mut cell, seq, _) = random_case(kind, Task::Adding, 11);
        let out = forward(&cell, &seq).unwrap().output[0];
        cell.readout_bias[0] -= out - 0.75;
        let (value, grad) = backward(&cell, &seq, Target::Value(0.75), Task::Adding).unwrap();
        assert!(value < 1e-20);
        assert!(grad.buffers().iter().flat_map(|b| b.iter()).all(|g| g.abs() <= 1e-10));
    }
}

#[test]
fn jacobian_products_respect_the_norm_bound() {
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let hidden = rng.gen_range(2..=8);
        let mut cell = CellParams::init(CellKind::Rnn, hidden, 2, 1, &mut rng);
        let gain = rng.gen_range(0.5..3.0);
        cell.gates[0].recurrent.iter_mut().for_each(|x| *x *= gain);
        let steps = 12;
        let seq: Vec<f64> = (0..2 * steps).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = Matrix::from_real(hidden, hidden, &cell.gates[0].recurrent).unwrap();
        let norms = state_jacobian_norms(&cell, &seq).unwrap();
        assert_eq!(norms.len(), steps);
        for (m, actual) in norms.iter().enumerate() {
            let bound = jacobian_norm_bound_check(&w, 1.0, m + 1).unwrap();
            assert!(*actual <= bound * (1.0 + 1e-12), "seed {seed} horizon {}: {actual} > {bound}", m + 1);
        }
    }
}
