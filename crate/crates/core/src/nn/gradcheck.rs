//! Central-difference verification of [`Mlp::accumulate_gradient`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{huber, Mlp, Workspace};

fn sample_loss(net: &Mlp, input: &[f64], action: usize, target: f64, delta: f64, ws: &mut Workspace) -> f64 {
    net.forward_into(input, ws).expect("input shape checked by caller");
    huber(ws.output()[action] - target, delta)
}

/// Largest coordinatewise relative disagreement between the analytic gradient
/// and a central difference with step `h`:
/// `max |g_a - g_fd| / max(1e-8, |g_a| + |g_fd|)`.
///
/// Uses the Huber loss with `delta = 1`.
pub fn finite_diff_check(net: &Mlp, input: &[f64], action: usize, target: f64, h: f64) -> crate::Result<f64> {
    const DELTA: f64 = 1.0;
    let mut analytic = vec![0.0; net.num_params()];
    let mut ws = Workspace::new(net);
    net.accumulate_gradient(input, action, target, DELTA, 1.0, &mut analytic, &mut ws)?;

    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (i, &g_a) in analytic.iter().enumerate() {
        let original = probe.params()[i];
        probe.params_mut()[i] = original + h;
        let up = sample_loss(&probe, input, action, target, DELTA, &mut ws);
        probe.params_mut()[i] = original - h;
        let down = sample_loss(&probe, input, action, target, DELTA, &mut ws);
        probe.params_mut()[i] = original;
        let g_fd = (up - down) / (2.0 * h);
        let rel = (g_a - g_fd).abs() / (g_a.abs() + g_fd.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Distance of a sample from the nearest non-differentiable point: the
/// smallest hidden pre-activation magnitude, or the Huber residual's distance
/// from `±1`.
pub fn kink_distance(net: &Mlp, input: &[f64], action: usize, target: f64) -> crate::Result<f64> {
    let mut ws = Workspace::new(net);
    net.forward_into(input, &mut ws)?;
    let mut nearest = ((ws.output()[action] - target).abs() - 1.0).abs();
    // recompute pre-activations, the workspace stores rectified values
    for layer in 0..net.num_layers() - 1 {
        let n_in = net.layer_sizes()[layer];
        let x = &ws.activations[layer];
        for (j, b) in net.biases(layer).iter().enumerate() {
            let row = &net.weights(layer)[j * n_in..(j + 1) * n_in];
            let z: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b;
            nearest = nearest.min(z.abs());
        }
    }
    Ok(nearest)
}

/// Outcome of [`gradcheck_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradcheckReport {
    pub trials: usize,
    /// Draws within `KINK_MARGIN` of a non-differentiable point.
    pub skipped: usize,
    pub max_error: f64,
}

/// Draws closer than this to a kink are not scored.
pub const KINK_MARGIN: f64 = 1e-3;

/// Checks `trials` random networks, inputs and targets with step `h`.
pub fn gradcheck_suite(trials: usize, h: f64, seed: u64) -> crate::Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradcheckReport {
        trials,
        skipped: 0,
        max_error: 0.0,
    };
    for _ in 0..trials {
        let mut sizes = vec![rng.gen_range(1..=8)];
        for _ in 0..rng.gen_range(1..=2) {
            sizes.push(rng.gen_range(1..=12));
        }
        sizes.push(rng.gen_range(1..=5));
        let mut net = Mlp::init(&sizes, &mut rng)?;
        for l in 0..net.num_layers() {
            for b in net.biases_mut(l) {
                *b = rng.gen_range(-0.5..0.5);
            }
        }
        let input: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let action = rng.gen_range(0..net.output_dim());
        let target = rng.gen_range(-3.0..3.0);
        if kink_distance(&net, &input, action, target)? < KINK_MARGIN {
            report.skipped += 1;
            continue;
        }
        report.max_error = report.max_error.max(finite_diff_check(&net, &input, action, target, h)?);
    }
    Ok(report)
}
