//! Shared inputs for the criterion benchmarks in `benches/`.

use eigbound::manifold::{build_icosphere, Manifold};
use eigbound::model::{PslProblem, SlProblem};

/// Regular model problems: flat, positively and negatively curved.
pub fn regular_problems() -> Vec<SlProblem> {
    [(2, 0.0, 1.0), (3, 1.0, 2.0), (4, -1.0, 2.0)]
        .iter()
        .map(|&(n, k, d)| SlProblem::new(n, k, d).expect("admissible"))
        .collect()
}

/// The singular sphere endpoint, handled by finite differences only.
pub fn sphere_problem(n: u32) -> SlProblem {
    SlProblem::new(n, 1.0, std::f64::consts::PI).expect("admissible")
}

pub fn p_problems() -> Vec<PslProblem> {
    [1.5, 3.0]
        .iter()
        .map(|&p| PslProblem::new(3, -1.0, 1.5, p).expect("admissible"))
        .collect()
}

pub fn icosphere(subdiv: u32) -> Manifold {
    build_icosphere(1.0, subdiv).expect("valid level").into()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_admissible() {
        assert_eq!(regular_problems().len(), 3);
        assert!(sphere_problem(3).is_near_singular());
        assert_eq!(p_problems().len(), 2);
        assert_eq!(icosphere(1).vertex_count(), 42);
    }
}
