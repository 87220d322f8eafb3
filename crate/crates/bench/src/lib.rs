//! Benchmark fixtures shared by the criterion targets.

use siegel_core::HalfIntegralMatrix;

/// Level-7 quaternary form of determinant 49.
pub fn level_seven_form() -> HalfIntegralMatrix {
    HalfIntegralMatrix::parse("4; 2 0 1 0; 0 2 0 1; 1 0 4 0; 0 1 0 4").expect("valid form")
}

/// A non-reduced ternary form for canonicalization.
pub fn skewed_ternary() -> HalfIntegralMatrix {
    HalfIntegralMatrix::parse("3; 10 7 3; 7 6 2; 3 2 4").expect("valid form")
}
