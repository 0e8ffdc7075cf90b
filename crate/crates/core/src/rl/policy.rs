use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{argmax, Mlp, MlpDocument};
use crate::task::{context_vector, ContextVector, Family, TaskSpec};

pub const POLICY_FORMAT_VERSION: u32 = 1;

/// What a policy expects as input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputLayout {
    pub family: Family,
    pub state_dim: usize,
    pub context_dim: usize,
}

/// A single-task network bound to the task it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Expert {
    pub task: TaskSpec,
    pub context: ContextVector,
    pub net: Mlp,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolicyKind {
    /// Sees only the state.
    SingleTask(Mlp),
    /// Sees `state ++ context`.
    Contextual(Mlp),
    /// One single-task expert per training task, routed by context.
    MixtureOfExperts(Vec<Expert>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    layout: InputLayout,
    kind: PolicyKind,
}

/// Index of the expert whose context is nearest to `context`; an exact match
/// has distance zero, ties go to the lowest index.
pub fn moe_select(context: &ContextVector, experts: &[ContextVector]) -> Result<usize> {
    if experts.is_empty() {
        return Err(Error::Empty("experts"));
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, e) in experts.iter().enumerate() {
        if e.len() != context.len() {
            return Err(Error::Shape(format!(
                "context has {} entries, expert {i} has {}",
                context.len(),
                e.len()
            )));
        }
        let d = context.distance_squared(e);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    Ok(best)
}

fn check_net(net: &Mlp, inputs: usize, what: &str) -> Result<()> {
    if net.input_dim() != inputs {
        return Err(Error::Shape(format!(
            "{what} network takes {} inputs, layout needs {inputs}",
            net.input_dim()
        )));
    }
    Ok(())
}

impl Policy {
    pub fn single_task(layout: InputLayout, net: Mlp) -> Result<Self> {
        check_net(&net, layout.state_dim, "single-task")?;
        Ok(Policy {
            layout,
            kind: PolicyKind::SingleTask(net),
        })
    }

    pub fn contextual(layout: InputLayout, net: Mlp) -> Result<Self> {
        check_net(&net, layout.state_dim + layout.context_dim, "contextual")?;
        Ok(Policy {
            layout,
            kind: PolicyKind::Contextual(net),
        })
    }

    pub fn mixture(layout: InputLayout, experts: Vec<(TaskSpec, Mlp)>) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::Empty("experts"));
        }
        let experts = experts
            .into_iter()
            .map(|(task, net)| {
                check_net(&net, layout.state_dim, "expert")?;
                if task.family != layout.family {
                    return Err(Error::Incompatible(format!("expert task `{}` is not a {} task", task.id, layout.family)));
                }
                Ok(Expert {
                    context: context_vector(&task)?,
                    task,
                    net,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Policy {
            layout,
            kind: PolicyKind::MixtureOfExperts(experts),
        })
    }

    pub fn layout(&self) -> InputLayout {
        self.layout
    }

    pub fn kind(&self) -> &PolicyKind {
        &self.kind
    }

    pub fn variant_name(&self) -> &'static str {
        match self.kind {
            PolicyKind::SingleTask(_) => "single_task",
            PolicyKind::Contextual(_) => "contextual",
            PolicyKind::MixtureOfExperts(_) => "mixture_of_experts",
        }
    }

    /// Total parameters across every network the policy holds.
    pub fn num_params(&self) -> usize {
        match &self.kind {
            PolicyKind::SingleTask(net) | PolicyKind::Contextual(net) => net.num_params(),
            PolicyKind::MixtureOfExperts(experts) => experts.iter().map(|e| e.net.num_params()).sum(),
        }
    }

    /// Expert the router would use for `context`, if this is a mixture.
    pub fn route(&self, context: &ContextVector) -> Result<Option<usize>> {
        match &self.kind {
            PolicyKind::MixtureOfExperts(experts) => {
                let contexts: Vec<ContextVector> = experts.iter().map(|e| e.context.clone()).collect();
                moe_select(context, &contexts).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn q_values(&self, state: &[f64], context: &ContextVector) -> Result<Vec<f64>> {
        if state.len() != self.layout.state_dim || context.len() != self.layout.context_dim {
            return Err(Error::Shape(format!(
                "policy expects state {} / context {}, got {} / {}",
                self.layout.state_dim,
                self.layout.context_dim,
                state.len(),
                context.len()
            )));
        }
        match &self.kind {
            PolicyKind::SingleTask(net) => net.forward(state),
            PolicyKind::Contextual(net) => {
                let mut input = Vec::with_capacity(net.input_dim());
                input.extend_from_slice(state);
                input.extend_from_slice(context.as_slice());
                net.forward(&input)
            }
            PolicyKind::MixtureOfExperts(experts) => {
                let i = self.route(context)?.expect("mixture");
                experts[i].net.forward(state)
            }
        }
    }

    /// Greedy action; ties go to the lowest index.
    pub fn act_greedy(&self, state: &[f64], context: &ContextVector) -> Result<usize> {
        Ok(argmax(&self.q_values(state, context)?))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&PolicyDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.format_version != POLICY_FORMAT_VERSION {
            return Err(Error::Version {
                found: probe.format_version,
                supported: POLICY_FORMAT_VERSION,
            });
        }
        Policy::try_from(serde_json::from_str::<PolicyDocument>(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Policy::from_json(&text)
    }
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpertDocument {
    task: TaskSpec,
    network: MlpDocument,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
enum PolicyBody {
    SingleTask { network: MlpDocument },
    Contextual { network: MlpDocument },
    MixtureOfExperts { experts: Vec<ExpertDocument> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyDocument {
    format_version: u32,
    layout: InputLayout,
    policy: PolicyBody,
}

impl From<&Policy> for PolicyDocument {
    fn from(p: &Policy) -> Self {
        let policy = match &p.kind {
            PolicyKind::SingleTask(net) => PolicyBody::SingleTask { network: net.into() },
            PolicyKind::Contextual(net) => PolicyBody::Contextual { network: net.into() },
            PolicyKind::MixtureOfExperts(experts) => PolicyBody::MixtureOfExperts {
                experts: experts
                    .iter()
                    .map(|e| ExpertDocument {
                        task: e.task.clone(),
                        network: (&e.net).into(),
                    })
                    .collect(),
            },
        };
        PolicyDocument {
            format_version: POLICY_FORMAT_VERSION,
            layout: p.layout,
            policy,
        }
    }
}

impl TryFrom<PolicyDocument> for Policy {
    type Error = Error;

    fn try_from(doc: PolicyDocument) -> Result<Self> {
        let layout = doc.layout;
        if layout.context_dim != layout.family.context_dim() {
            return Err(Error::Incompatible(format!(
                "{} policies use {} context entries, file declares {}",
                layout.family,
                layout.family.context_dim(),
                layout.context_dim
            )));
        }
        match doc.policy {
            PolicyBody::SingleTask { network } => Policy::single_task(layout, network.try_into()?),
            PolicyBody::Contextual { network } => Policy::contextual(layout, network.try_into()?),
            PolicyBody::MixtureOfExperts { experts } => Policy::mixture(
                layout,
                experts
                    .into_iter()
                    .map(|e| Ok((e.task, Mlp::try_from(e.network)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}
