//! Deterministic test functions on box domains.

use std::f64::consts::PI;

/// A benchmark target: deterministic evaluator on a box.
#[derive(Debug, Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    pub dim: usize,
    pub lo: &'static [f64],
    pub hi: &'static [f64],
    pub eval: fn(&[f64]) -> f64,
}

fn branin(x: &[f64]) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let a = 1.0;
    let b = 5.1 / (4.0 * PI * PI);
    let c = 5.0 / PI;
    let r = 6.0;
    let s = 10.0;
    let t = 1.0 / (8.0 * PI);
    a * (x2 - b * x1 * x1 + c * x1 - r).powi(2) + s * (1.0 - t) * x1.cos() + s
}

const HART3_A: [[f64; 3]; 4] = [
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
];
const HART3_P: [[f64; 3]; 4] = [
    [0.3689, 0.1170, 0.2673],
    [0.4699, 0.4387, 0.7470],
    [0.1091, 0.8732, 0.5547],
    [0.0381, 0.5743, 0.8828],
];
const HART_ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];

fn hartmann3(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut ex = 0.0;
        for j in 0..3 {
            let d = x[j] - HART3_P[i][j];
            ex += HART3_A[i][j] * d * d;
        }
        acc += HART_ALPHA[i] * (-ex).exp();
    }
    -acc
}

const HART6_A: [[f64; 6]; 4] = [
    [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
    [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
    [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
    [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
];
const HART6_P: [[f64; 6]; 4] = [
    [0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886],
    [0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991],
    [0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650],
    [0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381],
];

fn hartmann6(x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut ex = 0.0;
        for j in 0..6 {
            let d = x[j] - HART6_P[i][j];
            ex += HART6_A[i][j] * d * d;
        }
        acc += HART_ALPHA[i] * (-ex).exp();
    }
    -acc
}

fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

fn sine2(x: &[f64]) -> f64 {
    (2.0 * PI * x[0]).sin() + 0.5 * (4.0 * PI * x[1]).sin()
}

fn sine3(x: &[f64]) -> f64 {
    (2.0 * PI * x[0]).sin() + (2.0 * PI * x[1]).sin() + (2.0 * PI * x[2]).sin()
}

/// Smooth 2-D function with a wiggly first coordinate and a gently quadratic
/// second one: the canonical anisotropic scenario, a fine factor paired
/// with a coarse one.
fn aniso2(x: &[f64]) -> f64 {
    (2.0 * PI * x[0]).sin() * (1.0 + 0.3 * x[1]) + 0.25 * x[1] * x[1]
}

const UNIT2_LO: [f64; 2] = [0.0; 2];
const UNIT2_HI: [f64; 2] = [1.0; 2];
const UNIT3_LO: [f64; 3] = [0.0; 3];
const UNIT3_HI: [f64; 3] = [1.0; 3];
const UNIT6_LO: [f64; 6] = [0.0; 6];
const UNIT6_HI: [f64; 6] = [1.0; 6];
const BRANIN_LO: [f64; 2] = [-5.0, 0.0];
const BRANIN_HI: [f64; 2] = [10.0, 15.0];
const ROSEN2_LO: [f64; 2] = [-2.048; 2];
const ROSEN2_HI: [f64; 2] = [2.048; 2];
const ROSEN4_LO: [f64; 4] = [-2.048; 4];
const ROSEN4_HI: [f64; 4] = [2.048; 4];
const RASTR2_LO: [f64; 2] = [-5.12; 2];
const RASTR2_HI: [f64; 2] = [5.12; 2];
const RASTR3_LO: [f64; 3] = [-5.12; 3];
const RASTR3_HI: [f64; 3] = [5.12; 3];

/// The shipped catalog.
pub fn catalog() -> Vec<TestFunction> {
    vec![
        TestFunction {
            name: "branin",
            dim: 2,
            lo: &BRANIN_LO,
            hi: &BRANIN_HI,
            eval: branin,
        },
        TestFunction {
            name: "hartmann3",
            dim: 3,
            lo: &UNIT3_LO,
            hi: &UNIT3_HI,
            eval: hartmann3,
        },
        TestFunction {
            name: "hartmann6",
            dim: 6,
            lo: &UNIT6_LO,
            hi: &UNIT6_HI,
            eval: hartmann6,
        },
        TestFunction {
            name: "rosenbrock2",
            dim: 2,
            lo: &ROSEN2_LO,
            hi: &ROSEN2_HI,
            eval: rosenbrock,
        },
        TestFunction {
            name: "rosenbrock4",
            dim: 4,
            lo: &ROSEN4_LO,
            hi: &ROSEN4_HI,
            eval: rosenbrock,
        },
        TestFunction {
            name: "rastrigin2",
            dim: 2,
            lo: &RASTR2_LO,
            hi: &RASTR2_HI,
            eval: rastrigin,
        },
        TestFunction {
            name: "rastrigin3",
            dim: 3,
            lo: &RASTR3_LO,
            hi: &RASTR3_HI,
            eval: rastrigin,
        },
        TestFunction {
            name: "sine2",
            dim: 2,
            lo: &UNIT2_LO,
            hi: &UNIT2_HI,
            eval: sine2,
        },
        TestFunction {
            name: "sine3",
            dim: 3,
            lo: &UNIT3_LO,
            hi: &UNIT3_HI,
            eval: sine3,
        },
        TestFunction {
            name: "aniso2",
            dim: 2,
            lo: &UNIT2_LO,
            hi: &UNIT2_HI,
            eval: aniso2,
        },
    ]
}

pub fn function_by_name(name: &str) -> Option<TestFunction> {
    catalog().into_iter().find(|f| f.name == name)
}
