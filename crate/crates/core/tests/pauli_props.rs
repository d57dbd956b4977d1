use num_complex::Complex64;
use proptest::prelude::*;

use aqc_linsolve::linalg::ComplexMatrix;
use aqc_linsolve::pauli::{format, parse};

fn letter_matrix(letter: char) -> ComplexMatrix {
    let (o, z, i) = (
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 1.0),
    );
    let entries = match letter {
        'I' => [o, z, z, o],
        'X' => [z, o, o, z],
        'Y' => [z, -i, i, z],
        'Z' => [o, z, z, -o],
        _ => unreachable!(),
    };
    ComplexMatrix::from_row_slice(2, 2, &entries)
}

/// Entry-by-entry Kronecker product; deliberately independent of the crate.
fn naive_kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    ComplexMatrix::from_fn(ra * rb, ca * cb, |r, c| {
        a[(r / rb, c / cb)] * b[(r % rb, c % cb)]
    })
}

fn naive(terms: &[(i32, String)], divisor: u32) -> ComplexMatrix {
    let n = terms[0].1.len();
    let mut out = ComplexMatrix::zeros(1 << n, 1 << n);
    for (coef, word) in terms {
        let mut m = ComplexMatrix::identity(1, 1);
        for letter in word.chars() {
            m = naive_kron(&m, &letter_matrix(letter));
        }
        out += m * Complex64::new(*coef as f64 / divisor as f64, 0.0);
    }
    out
}

fn render(terms: &[(i32, String)], divisor: u32) -> String {
    let mut body = String::new();
    for (coef, word) in terms {
        body.push_str(&format!("{coef:+}{word}"));
    }
    format!("({body})/{divisor}")
}

fn word(n: usize) -> impl Strategy<Value = String> {
    proptest::collection::vec(prop::sample::select(vec!['I', 'X', 'Y', 'Z']), n)
        .prop_map(|v| v.into_iter().collect())
}

fn terms() -> impl Strategy<Value = (Vec<(i32, String)>, u32)> {
    (1usize..=4).prop_flat_map(|n| {
        (
            proptest::collection::vec((-9i32..=9, word(n)), 1..6),
            1u32..=8,
        )
    })
}

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn round_trip_preserves_matrix((t, d) in terms()) {
        let text = render(&t, d);
        let e = parse(&text).unwrap();
        let again = parse(&format(&e)).unwrap();
        let (m1, m0) = (again.to_matrix(), e.to_matrix());
        prop_assert_eq!(m1.matrix(), m0.matrix());
        prop_assert_eq!(&again, &e);
    }

    #[test]
    fn matrices_are_exactly_hermitian((t, d) in terms()) {
        let m = parse(&render(&t, d)).unwrap().to_matrix();
        prop_assert_eq!(m.matrix().adjoint(), m.matrix().clone());
    }

    #[test]
    fn matches_naive_kronecker((t, d) in terms()) {
        let m = parse(&render(&t, d)).unwrap().to_matrix();
        prop_assert!(max_diff(m.matrix(), &naive(&t, d)) <= 1e-14);
    }

    #[test]
    fn concatenation_is_linear(
        (a, b) in (1usize..=3).prop_flat_map(|n| (
            proptest::collection::vec((-9i32..=9, word(n)), 1..5),
            proptest::collection::vec((-9i32..=9, word(n)), 1..5),
        ))
    ) {
        let mut both = a.clone();
        both.extend(b.iter().cloned());
        let joined = parse(&render(&both, 1)).unwrap().to_matrix();
        let sum = naive(&a, 1) + naive(&b, 1);
        prop_assert!(max_diff(joined.matrix(), &sum) <= 1e-14);
    }

    #[test]
    fn trace_counts_identity_word((t, d) in terms()) {
        let e = parse(&render(&t, d)).unwrap();
        let expected = e.dim() as f64 * e.identity_coefficient() / e.divisor();
        prop_assert!((e.to_matrix().trace() - expected).abs() <= 1e-12);
    }
}
