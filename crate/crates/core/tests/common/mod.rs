#![allow(dead_code)]

use std::sync::OnceLock;

use figure_eight::action::Minimization;
use figure_eight::cli::{refine_input, solve, trajectories, RunConfig, SolutionInput, Trajectories};
use figure_eight::loop_space::FourierLoop;
use figure_eight::refiner::{RefinedSolution, Refinement};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub struct Eight {
    pub minimization: Minimization,
    pub solution: RefinedSolution,
    pub refinement: Refinement,
    pub trajectories: Trajectories,
}

/// The refined a = −1 eight on default settings, computed once per test binary.
pub fn eight() -> &'static Eight {
    static CELL: OnceLock<Eight> = OnceLock::new();
    CELL.get_or_init(|| {
        let config = RunConfig::default();
        let minimization = solve(&config).expect("solve");
        let (solution, refinement) =
            refine_input(&SolutionInput::Loop(minimization.solution.clone()), &config).expect("refine");
        let trajectories = trajectories(&SolutionInput::Refined(solution), &config).expect("trajectories");
        Eight { minimization, solution, refinement, trajectories }
    })
}

/// The Lissajous seed with random decaying perturbations; collision free.
pub fn perturbed_seed(rng: &mut ChaCha8Rng) -> FourierLoop {
    let seed = FourierLoop::seed_eight(12.0, 0.3).unwrap();
    let layout = seed.packed_layout();
    let packed: Vec<f64> = seed
        .packed()
        .iter()
        .zip(&layout)
        .map(|(c, &(_, k))| c + rng.gen_range(-0.05..0.05) / (k * k) as f64)
        .collect();
    seed.with_packed(&packed).unwrap()
}
