use crate::pep::{PepInstance, RowOrigin, StepSchedule};

use super::worst::WorstCase;

/// Named coordinate of a [`DesignPoint`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    /// `tau`, `lambda_{i,j}`, `eta_i` or `sigma_k`, keyed by the row it multiplies.
    Multiplier(RowOrigin),
    /// Free schedule parameter.
    Param(usize),
}

/// Decision vector `x = (multipliers, schedule parameters)`.
///
/// Multipliers come first in row order of the instance, then the free
/// parameters of the schedule. All multipliers are sign constrained.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignPoint {
    pub schedule: StepSchedule<f64>,
    pub instance: PepInstance<f64>,
    pub multipliers: Vec<f64>,
    pub value: f64,
}

impl DesignPoint {
    pub fn from_worst_case(schedule: StepSchedule<f64>, wc: WorstCase) -> Self {
        Self { schedule, instance: wc.instance, multipliers: wc.multipliers, value: wc.value }
    }

    pub fn n_multipliers(&self) -> usize {
        self.multipliers.len()
    }

    pub fn n_params(&self) -> usize {
        self.schedule.param_count()
    }

    pub fn dim(&self) -> usize {
        self.n_multipliers() + self.n_params()
    }

    pub fn index(&self, c: Component) -> Option<usize> {
        match c {
            Component::Multiplier(o) => self.instance.position(o),
            Component::Param(m) if m < self.n_params() => Some(self.n_multipliers() + m),
            Component::Param(_) => None,
        }
    }

    pub fn component(&self, k: usize) -> Option<Component> {
        let n = self.n_multipliers();
        if k < n {
            Some(Component::Multiplier(self.instance.rows[k].origin))
        } else if k < self.dim() {
            Some(Component::Param(k - n))
        } else {
            None
        }
    }

    pub fn is_sign_constrained(&self, k: usize) -> bool {
        k < self.n_multipliers()
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = self.multipliers.clone();
        x.extend(self.schedule.params());
        x
    }
}
