use serde::{Deserialize, Serialize};

use crate::dynamics::ControlProblem;
use crate::error::{invalid, Result};
use crate::optimizers::{grid_search, SearchBox};
use crate::pulses::PulseFamily;

/// A two-parameter fidelity surface for one trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub trial: usize,
    pub scheme: String,
    pub t_f: f64,
    pub axis_names: Vec<String>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `values[i * y.len() + j]` = F(x[i], y[j]).
    pub values: Vec<f64>,
    pub best_params: Vec<f64>,
    pub best_fidelity: f64,
    pub converged: bool,
}

impl LandscapeGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.y.len() + j]
    }
}

fn family_id(family: &PulseFamily) -> String {
    match family {
        PulseFamily::Gaussian => "gaussian".into(),
        PulseFamily::Polynomial { n_lambda } => format!("poly{n_lambda}"),
    }
}

/// Grid search over a 2D box, keeping the whole surface.
pub fn landscape_sweep(
    problem: &ControlProblem<f64>,
    trial: usize,
    family: &PulseFamily,
    search_box: &SearchBox<f64>,
) -> Result<LandscapeGrid> {
    if search_box.dims() != 2 {
        return Err(invalid("landscapes need a two-parameter box"));
    }
    let g = grid_search(problem, family, search_box)?;
    let mut axes = g.axes.into_iter();
    let (x, y) = (axes.next().unwrap_or_default(), axes.next().unwrap_or_default());
    Ok(LandscapeGrid {
        trial,
        scheme: family_id(family),
        t_f: problem.t_f,
        axis_names: family.axis_names(),
        x,
        y,
        values: g.values,
        best_params: g.result.best_params,
        best_fidelity: g.result.best_fidelity,
        converged: g.result.converged,
    })
}
