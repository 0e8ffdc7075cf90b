use super::Transition;
use crate::error::{Error, Result};
use crate::nn::{argmax, Mlp, Workspace};

/// Bootstrapped regression target for one transition: the online network
/// picks the next action, the target network scores it.
pub fn ddqn_target(
    reward: f64,
    terminal: bool,
    next_input: &[f64],
    online: &Mlp,
    target: &Mlp,
    gamma: f64,
    online_ws: &mut Workspace,
    target_ws: &mut Workspace,
) -> Result<f64> {
    if terminal {
        return Ok(reward);
    }
    online.forward_into(next_input, online_ws)?;
    let a = argmax(online_ws.output());
    target.forward_into(next_input, target_ws)?;
    Ok(reward + gamma * target_ws.output()[a])
}

/// [`ddqn_target`] over a batch. Network inputs are `next_state ++ context`.
pub fn ddqn_targets(batch: &[Transition], online: &Mlp, target: &Mlp, gamma: f64) -> Result<Vec<f64>> {
    if online.layer_sizes() != target.layer_sizes() {
        return Err(Error::Shape("online and target networks differ in shape".into()));
    }
    let mut ws_online = Workspace::new(online);
    let mut ws_target = Workspace::new(target);
    let mut input = Vec::new();
    batch
        .iter()
        .map(|t| {
            input.clear();
            input.extend_from_slice(&t.next_state);
            input.extend_from_slice(&t.context);
            ddqn_target(t.reward, t.terminal, &input, online, target, gamma, &mut ws_online, &mut ws_target)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// 1 -> 2 linear net whose outputs equal `q` for input 1.
    fn constant_head(q: [f64; 2]) -> Mlp {
        let mut net = Mlp::zeros(&[1, 2]).unwrap();
        net.weights_mut(0).copy_from_slice(&q);
        net
    }

    fn transition(reward: f64, terminal: bool) -> Transition {
        Transition {
            state: vec![1.0],
            action: 0,
            reward,
            next_state: vec![1.0],
            terminal,
            context: vec![],
        }
    }

    #[test]
    fn terminal_cuts_bootstrap() {
        let net = constant_head([5.0, 7.0]);
        let y = ddqn_targets(&[transition(-1000.0, true)], &net, &net, 0.99).unwrap();
        assert_eq!(y, vec![-1000.0]);
    }

    #[test]
    fn selection_and_evaluation_are_decoupled() {
        let online = constant_head([0.1, 0.9]);
        let target = constant_head([0.5, 0.2]);
        let y = ddqn_targets(&[transition(1.0, false)], &online, &target, 0.99).unwrap();
        assert!((y[0] - 1.198).abs() < 1e-12);
    }

    #[test]
    fn shared_network_gives_max_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::init(&[3, 8, 4], &mut rng).unwrap();
        let batch: Vec<Transition> = (0..50)
            .map(|_| Transition {
                state: vec![0.0; 2],
                action: 0,
                reward: rng.gen_range(-1.0..1.0),
                next_state: vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
                terminal: false,
                context: vec![rng.gen_range(-1.0..1.0)],
            })
            .collect();
        let y = ddqn_targets(&batch, &net, &net, 0.9).unwrap();
        for (t, y) in batch.iter().zip(y) {
            let input = [t.next_state.clone(), t.context.clone()].concat();
            let q = net.forward(&input).unwrap();
            let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(y, t.reward + 0.9 * max);
        }
    }

    #[test]
    fn terminal_targets_ignore_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = Mlp::init(&[1, 4, 2], &mut rng).unwrap();
        let b = Mlp::init(&[1, 4, 2], &mut rng).unwrap();
        let batch = [transition(3.5, true)];
        assert_eq!(ddqn_targets(&batch, &a, &b, 0.99).unwrap(), ddqn_targets(&batch, &b, &a, 0.5).unwrap());
    }
}
