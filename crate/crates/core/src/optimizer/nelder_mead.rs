//! Nelder-Mead simplex minimizer with an evaluation budget.
//!
//! Standard coefficients (reflect 1, expand 2, contract 0.5, shrink 0.5),
//! best-ever bookkeeping, and a per-evaluation cost history. No gradients,
//! no constraints: callers work in an unconstrained reparametrization.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Offset added per coordinate to build the initial simplex.
    pub initial_step: f64,
    /// Stop once the simplex cost spread falls below this.
    pub cost_spread_tolerance: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions {
            max_evaluations: 400,
            initial_step: 0.8,
            cost_spread_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub best_point: Vec<f64>,
    pub best_cost: f64,
    pub evaluations: usize,
    /// Cost of every evaluation in call order.
    pub history: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut cost: F,
    start: &[f64],
    options: &NelderMeadOptions,
) -> MinimizeOutcome {
    let dim = start.len();
    assert!(dim >= 1);
    let mut history = Vec::new();
    let mut best_point = start.to_vec();
    let mut best_cost = f64::INFINITY;

    let mut evaluations = 0usize;
    let mut evaluate = |point: &[f64],
                        history: &mut Vec<f64>,
                        best_point: &mut Vec<f64>,
                        best_cost: &mut f64,
                        evaluations: &mut usize|
     -> f64 {
        let value = cost(point);
        history.push(value);
        *evaluations += 1;
        if value < *best_cost {
            *best_cost = value;
            *best_point = point.to_vec();
        }
        value
    };

    macro_rules! eval {
        ($point:expr) => {
            evaluate(
                $point,
                &mut history,
                &mut best_point,
                &mut best_cost,
                &mut evaluations,
            )
        };
    }
    macro_rules! budget_left {
        () => {
            evaluations < options.max_evaluations
        };
    }

    // initial simplex: the start plus one step along each coordinate
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval!(start);
    simplex.push((start.to_vec(), f0));
    for k in 0..dim {
        if !budget_left!() {
            return MinimizeOutcome {
                best_point,
                best_cost,
                evaluations,
                history,
            };
        }
        let mut vertex = start.to_vec();
        vertex[k] += options.initial_step;
        let fv = eval!(&vertex);
        simplex.push((vertex, fv));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));

    while budget_left!() {
        if simplex[dim].1 - simplex[0].1 < options.cost_spread_tolerance {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|(x, _)| x[k]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();

        let reflected: Vec<f64> = (0..dim)
            .map(|k| centroid[k] + REFLECT * (centroid[k] - worst.0[k]))
            .collect();
        let f_reflected = eval!(&reflected);

        if f_reflected < simplex[0].1 {
            if budget_left!() {
                let expanded: Vec<f64> = (0..dim)
                    .map(|k| centroid[k] + EXPAND * (reflected[k] - centroid[k]))
                    .collect();
                let f_expanded = eval!(&expanded);
                simplex[dim] = if f_expanded < f_reflected {
                    (expanded, f_expanded)
                } else {
                    (reflected, f_reflected)
                };
            } else {
                simplex[dim] = (reflected, f_reflected);
            }
        } else if f_reflected < simplex[dim - 1].1 {
            simplex[dim] = (reflected, f_reflected);
        } else if budget_left!() {
            let contracted: Vec<f64> = if f_reflected < worst.1 {
                (0..dim)
                    .map(|k| centroid[k] + CONTRACT * (reflected[k] - centroid[k]))
                    .collect()
            } else {
                (0..dim)
                    .map(|k| centroid[k] - CONTRACT * (centroid[k] - worst.0[k]))
                    .collect()
            };
            let f_contracted = eval!(&contracted);
            if f_contracted < worst.1.min(f_reflected) {
                simplex[dim] = (contracted, f_contracted);
            } else {
                // shrink toward the best vertex
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    if !budget_left!() {
                        break;
                    }
                    for k in 0..dim {
                        vertex.0[k] = anchor[k] + SHRINK * (vertex.0[k] - anchor[k]);
                    }
                    vertex.1 = eval!(&vertex.0);
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    }

    MinimizeOutcome {
        best_point,
        best_cost,
        evaluations,
        history,
    }
}
