use num_complex::Complex64;

use locperv::gmv::to_gmv;
use locperv::transport::m_eps;
use locperv::{int, rat, Frame, QMatrix, Rational, SignWord};
use locperv_lefschetz::{lefschetz_sheaf, monodromy_at_infinity, Lefschetz, LefschetzError};

const PRECISION: u32 = 12;

fn poly(c: &[i64]) -> Vec<Rational> {
    c.iter().map(|&x| int(x)).collect()
}

fn scalar(m: &QMatrix) -> i64 {
    assert_eq!(m.shape(), (1, 1));
    m[(0, 0)].to_integer().try_into().unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..n)
                    .filter(|k| !p.contains(k))
                    .map(|k| [p.as_slice(), &[k]].concat())
                    .collect::<Vec<_>>()
            })
            .collect();
    }
    out
}

/// Ranks of `(M - c)^k` for the given eigenvalue candidates; with the
/// characteristic polynomial this pins down the conjugacy class here.
fn rank_profile(m: &QMatrix, eigen: &[i64]) -> Vec<usize> {
    let n = m.rows();
    eigen
        .iter()
        .flat_map(|&c| {
            let shifted = m - &QMatrix::identity(n).scale(&int(c));
            (1..=n).map(move |k| shifted.pow(k as i64).unwrap().rank())
        })
        .collect()
}

#[test]
fn square_has_one_point_with_sign_monodromy() {
    let l = Lefschetz::generate(&poly(&[0, 0, 1]), PRECISION).unwrap();
    let f = l.perv();
    assert_eq!((f.len(), f.dim(0)), (1, 1));
    assert_eq!(f.phi(0).monodromy(), &QMatrix::from_ints(&[[-1]]));
    assert!(l.critical_values()[0].norm() < 1e-12);
    assert_eq!(
        monodromy_at_infinity(&poly(&[0, 0, 1]), PRECISION).unwrap(),
        QMatrix::from_ints(&[[-1]])
    );
}

#[test]
fn cubic_has_two_unit_transports() {
    let coeffs = poly(&[0, -3, 0, 1]);
    let l = Lefschetz::generate(&coeffs, PRECISION).unwrap();
    let f = l.perv();
    assert_eq!(f.len(), 2);
    let q = l.rotation();
    let qc = Complex64::new(q.to_f64().0, q.to_f64().1);
    for (c, v) in l.critical_points().iter().zip(l.critical_values()) {
        let expected = if c.re > 0.0 { -2.0 } else { 2.0 };
        assert!((c.norm() - 1.0).abs() < 1e-12);
        assert!((v / qc - expected).norm() < 1e-9);
    }
    for i in 0..2 {
        assert_eq!(f.dim(i), 1);
        assert_eq!(f.phi(i).monodromy(), &QMatrix::from_ints(&[[-1]]));
        assert_eq!(scalar(f.mplus(i, 1 - i)).abs(), 1);
    }
    assert_eq!(lefschetz_sheaf(&coeffs, 2 * PRECISION).unwrap(), *f);
    assert_eq!(lefschetz_sheaf(&coeffs, 4 * PRECISION).unwrap(), *f);

    let mi = monodromy_at_infinity(&coeffs, PRECISION).unwrap();
    assert_eq!(mi.char_poly().unwrap(), vec![int(1), int(1), int(1)]);
}

#[test]
fn degenerate_functions_are_rejected() {
    for c in [&[0, 0, 0, 1][..], &[0, 0, -2, 0, 1], &[5], &[1, 0, 0]] {
        assert!(
            matches!(
                Lefschetz::generate(&poly(c), PRECISION),
                Err(LefschetzError::DegenerateFunction(_))
            ),
            "{c:?}"
        );
    }
}

#[test]
fn monodromy_at_infinity_is_a_full_cycle() {
    for c in [
        &[0, -3, 0, 1][..],
        &[1, -5, 0, 0, 1],
        &[0, 4, 0, -5, 0, 1],
        &[2, 0, 1, 0, 0, 0, 1],
    ] {
        let d = c.len() - 1;
        let m = monodromy_at_infinity(&poly(c), PRECISION).unwrap();
        assert_eq!(m.char_poly().unwrap(), vec![int(1); d], "{c:?}");
        assert!(m.pow(d as i64).unwrap().is_identity());
    }
}

#[test]
fn rescaling_keeps_the_conjugacy_class() {
    let base = poly(&[0, -3, 0, 1]);
    let reference = monodromy_at_infinity(&base, PRECISION).unwrap();
    for (lambda, mu) in [
        (rat(2, 1), rat(1, 1)),
        (rat(1, 1), rat(-3, 2)),
        (rat(-1, 3), rat(5, 1)),
    ] {
        // mu * S(lambda x)
        let scaled: Vec<Rational> = base
            .iter()
            .enumerate()
            .map(|(k, c)| c * &mu * num_traits::pow(lambda.clone(), k))
            .collect();
        let m = monodromy_at_infinity(&scaled, PRECISION).unwrap();
        assert_eq!(m.char_poly().unwrap(), reference.char_poly().unwrap());
        assert_eq!(
            rank_profile(&m, &[1, -1]),
            rank_profile(&reference, &[1, -1])
        );
    }
}

#[test]
fn numeric_transports_match_the_engine_on_collinear_values() {
    // x^5 - 5x^3 + 4x has four real critical values, hence a collinear configuration
    let l = Lefschetz::generate(&poly(&[0, 4, 0, -5, 0, 1]), PRECISION).unwrap();
    let f = l.perv();
    assert_eq!(f.len(), 4);
    assert!(f.config().collinear_triple().is_some());
    let mut checked = 0;
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            for w in SignWord::enumerate(f.intermediates(i, j).len()) {
                let numeric = l.transport(i, j, &w).unwrap();
                assert_eq!(
                    numeric,
                    m_eps(f, i, j, &w, Frame::DirectionStalks).unwrap(),
                    "{i}->{j} {w:?}"
                );
                checked += 1;
            }
            assert_eq!(&l.based_transport(i, j).unwrap(), f.mplus(i, j));
        }
    }
    assert_eq!(checked, 22);
}

#[test]
fn based_transports_match_for_generic_values() {
    for c in [
        &[1, -5, 0, 0, 1][..],
        &[0, 1, 0, 0, 1],
        &[0, 2, -1, 0, 1],
        &[0, 0, 2, 2, -2, 1],
    ] {
        let l = Lefschetz::generate(&poly(c), PRECISION).unwrap();
        let f = l.perv();
        for i in 0..f.len() {
            for j in 0..f.len() {
                if i != j {
                    assert_eq!(
                        &l.based_transport(i, j).unwrap(),
                        f.mplus(i, j),
                        "{c:?} {i}->{j}"
                    );
                }
            }
        }
    }
}

#[test]
fn glued_local_data_reproduce_the_monodromy_at_infinity() {
    for c in [
        &[0, -3, 0, 1][..],
        &[1, -5, 0, 0, 1],
        &[0, 1, 0, 0, 1],
        &[0, 2, -1, 0, 1],
    ] {
        let coeffs = poly(c);
        let f = lefschetz_sheaf(&coeffs, PRECISION).unwrap();
        assert!(f.config().is_convex_position(), "{c:?}");
        let at_infinity = monodromy_at_infinity(&coeffs, PRECISION).unwrap();
        let d = c.len() - 1;
        for order in permutations(f.len()) {
            let glued = to_gmv(&f, &order).unwrap().total_psi_monodromy();
            assert_eq!(glued.rows(), d - 1);
            assert_eq!(
                glued.char_poly().unwrap(),
                at_infinity.char_poly().unwrap(),
                "{c:?} {order:?}"
            );
            assert_eq!(
                rank_profile(&glued, &[1, -1]),
                rank_profile(&at_infinity, &[1, -1]),
                "{c:?} {order:?}"
            );
        }
    }
}
