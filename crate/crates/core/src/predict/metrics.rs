use serde::{Deserialize, Serialize};

/// Fraction of cells where `predicted` equals `truth`, both `[sample][g][t]`.
pub fn accuracy(predicted: &[Vec<Vec<u8>>], truth: &[Vec<Vec<u8>>]) -> f64 {
    let (mut wrong, mut cells) = (0usize, 0usize);
    for (p, y) in predicted.iter().zip(truth) {
        for (pr, yr) in p.iter().zip(y) {
            assert_eq!(pr.len(), yr.len(), "row length mismatch");
            wrong += pr.iter().zip(yr).filter(|(a, b)| a != b).count();
            cells += pr.len();
        }
    }
    if cells == 0 {
        return 1.0;
    }
    1.0 - wrong as f64 / cells as f64
}

/// Cell fractions by outcome; positive means ON.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub true_pos: f64,
    pub true_neg: f64,
    pub false_pos: f64,
    /// Predicted OFF where the generator was ON.
    pub false_neg: f64,
}

pub fn confusion(predicted: &[Vec<Vec<u8>>], truth: &[Vec<Vec<u8>>]) -> Confusion {
    let mut n = [0usize; 4];
    for (p, y) in predicted.iter().zip(truth) {
        for (pr, yr) in p.iter().zip(y) {
            for (&a, &b) in pr.iter().zip(yr) {
                n[usize::from(a == 1) * 2 + usize::from(b == 1)] += 1;
            }
        }
    }
    let total: usize = n.iter().sum();
    if total == 0 {
        return Confusion::default();
    }
    let f = |k: usize| n[k] as f64 / total as f64;
    Confusion { true_neg: f(0), false_neg: f(1), false_pos: f(2), true_pos: f(3) }
}
