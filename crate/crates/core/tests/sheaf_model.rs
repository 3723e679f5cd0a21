use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::index::sample;

use locperv::fixtures::{
    fixture, random_config, random_invertible, random_matrix, random_perv, rng, FIXTURES,
};
use locperv::gmv::{from_gmv, to_gmv, GmvQData};
use locperv::serial::{parse, perv_from_json, perv_to_json, to_pretty};
use locperv::{
    direction_cmp, gauss, CircleLocalSystem, Configuration, Error, GaussRat, LocalizedPerv,
    QMatrix, QPerv,
};

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn conf(pts: &[(i64, i64)]) -> Configuration {
    Configuration::new(pts.iter().map(|&(a, b)| gauss(a, b)).collect()).unwrap()
}

#[test]
fn construction_examples() {
    let one = LocalizedPerv::new(
        conf(&[(0, 0)]),
        vec![CircleLocalSystem::trivial(1)],
        BTreeMap::new(),
    )
    .unwrap();
    assert_eq!(one, QPerv::unit());

    let pair = LocalizedPerv::new(
        conf(&[(0, 0), (0, 1)]),
        vec![CircleLocalSystem::trivial(1); 2],
        BTreeMap::new(),
    )
    .unwrap();
    assert!(pair.mplus(0, 1).is_zero() && pair.mplus(1, 0).is_zero());
    let sky = QPerv::skyscraper(gauss(0, 0), 1)
        .unwrap()
        .direct_sum(&QPerv::skyscraper(gauss(0, 1), 1).unwrap())
        .unwrap();
    assert_eq!(sky, pair);

    assert!(matches!(
        CircleLocalSystem::new(QMatrix::zeros(1, 1)),
        Err(Error::NotInvertible)
    ));
    let horizontal = LocalizedPerv::<locperv::Rational>::new(
        conf(&[(0, 0), (3, 0)]),
        vec![CircleLocalSystem::trivial(1); 2],
        BTreeMap::new(),
    );
    assert!(matches!(horizontal, Err(Error::HorizontalPair(0, 1))));
    let mut bad = BTreeMap::new();
    bad.insert((0, 1), QMatrix::zeros(2, 1));
    let shaped = LocalizedPerv::new(
        conf(&[(0, 0), (0, 1)]),
        vec![CircleLocalSystem::trivial(1); 2],
        bad,
    );
    assert!(matches!(shaped, Err(Error::Shape(_))));
}

#[test]
fn skyscraper_examples() {
    let u = QPerv::skyscraper(gauss(0, 0), 1).unwrap();
    assert_eq!(u, QPerv::unit());
    let s = QPerv::skyscraper(gauss(1, 1), 2).unwrap();
    assert_eq!((s.len(), s.dim(0)), (1, 2));
    assert!(s.phi(0).monodromy().is_identity());
    assert!(matches!(
        QPerv::skyscraper(gauss(0, 0), 0),
        Err(Error::EmptyObject)
    ));
}

#[test]
fn direct_sum_examples() {
    let f = fixture("collinear4").unwrap();
    assert_eq!(f.direct_sum(&QPerv::zero()).unwrap(), f);
    assert_eq!(QPerv::zero().direct_sum(&f).unwrap(), f);
    let u = QPerv::unit();
    let uu = u.direct_sum(&u).unwrap();
    assert_eq!((uu.len(), uu.dim(0)), (1, 2));
    assert!(uu.phi(0).monodromy().is_identity());
}

#[test]
fn rotation_examples() {
    for name in FIXTURES {
        let f = fixture(name).unwrap();
        assert_eq!(f.rotate_by(&gauss(1, 0)).unwrap(), f, "{name}");
        if let (Ok(once), Ok(twice)) = (f.rotate_by(&gauss(0, 1)), f.rotate_by(&gauss(-1, 0))) {
            if let Ok(again) = once.rotate_by(&gauss(0, 1)) {
                assert_eq!(again, twice, "{name}");
            }
        }
    }
    let f = fixture("segment").unwrap();
    assert!(matches!(
        f.rotate_by(&gauss(1, -2)),
        Err(Error::HorizontalPair(0, 1))
    ));
    let q = gauss(3, 1);
    let back = f
        .rotate_by(&q)
        .unwrap()
        .rotate_by(&q.inv().unwrap())
        .unwrap();
    assert_eq!(back, f);
}

#[test]
fn gmv_examples() {
    let q = to_gmv(&QPerv::unit(), &[0]).unwrap();
    assert_eq!(q.psi(), 1);
    assert_eq!(q.u(0), &QMatrix::identity(1));
    assert!(q.v(0).is_zero());

    let tri = fixture("triangle").unwrap();
    for order in [[0, 1, 2], [2, 0, 1], [1, 2, 0]] {
        let q = to_gmv(&tri, &order).unwrap();
        assert!(q.sylvester_holds());
        assert_eq!(from_gmv(&q, tri.config(), &order).unwrap(), tri);
    }

    assert!(matches!(
        to_gmv(&fixture("collinear3").unwrap(), &[0, 1, 2]),
        Err(Error::NotConvex)
    ));
    let singular = GmvQData::new(1, vec![QMatrix::identity(1)], vec![QMatrix::identity(1)]);
    assert!(matches!(singular, Err(Error::NotInvertible)));
}

/// Lattice points on the circle of radius 5 with pairwise distinct heights.
const CIRCLE: [(i64, i64); 7] = [(5, 0), (4, 3), (3, 4), (0, 5), (-4, -3), (-3, -4), (0, -5)];

fn convex_perv(seed: u64, n: usize, max_dim: usize) -> QPerv {
    let mut r = rng(seed);
    let pts = sample(&mut r, CIRCLE.len(), n)
        .into_iter()
        .map(|k| gauss(CIRCLE[k].0, CIRCLE[k].1))
        .collect();
    random_perv(&mut r, Configuration::new(pts).unwrap(), max_dim)
}

/// Rotations by these stay free of horizontal pairs on generic lattice data.
fn rotation() -> impl Strategy<Value = GaussRat> {
    prop::sample::select(vec![
        gauss(1, 0),
        gauss(0, 1),
        gauss(-1, 0),
        gauss(0, -1),
        gauss(7, 1),
        gauss(1, 7),
        gauss(-7, 1),
        gauss(-1, -7),
        gauss(5, -2),
        gauss(-2, 5),
    ])
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn stored_shapes_match_dims(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, 0.5);
        let f = random_perv(&mut r, c, 3);
        for (&(i, j), m) in f.transports() {
            prop_assert_eq!(m.shape(), (f.dim(j), f.dim(i)));
        }
        prop_assert_eq!(f.transports().len(), n * (n - 1));
    }

    #[test]
    fn json_round_trip_is_byte_exact(seed in any::<u64>(), n in 1usize..=5) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, 0.5);
        let f = random_perv(&mut r, c, 3);
        let text = to_pretty(&perv_to_json(&f));
        let g: QPerv = perv_from_json(&parse(&text).unwrap()).unwrap();
        prop_assert_eq!(&g, &f);
        prop_assert_eq!(to_pretty(&perv_to_json(&g)), text);
    }

    #[test]
    fn gmv_round_trip(seed in any::<u64>(), n in 1usize..=5, perm_seed in any::<u64>()) {
        let f = convex_perv(seed, n, 2);
        let mut order: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(order.as_mut_slice(), &mut rng(perm_seed));
        let q = to_gmv(&f, &order).unwrap();
        prop_assert!(q.sylvester_holds());
        for (k, &p) in order.iter().enumerate() {
            prop_assert_eq!(&q.phi_monodromy(k), f.phi(p).monodromy());
            for (l, &pl) in order.iter().enumerate() {
                if l != k {
                    prop_assert_eq!(&(q.v(l) * q.u(k)), f.mplus(p, pl));
                }
            }
        }
        prop_assert_eq!(from_gmv(&q, f.config(), &order).unwrap(), f);
    }

    #[test]
    fn lifted_rotations_compose(seed in any::<u64>(), n in 1usize..=4, q in rotation(), p in rotation(), w in -1i64..=1, v in -1i64..=1) {
        let mut r = rng(seed);
        let c = random_config(&mut r, n, 0.4);
        let f = random_perv(&mut r, c, 2);
        let qp = &q * &p;
        let carry = (direction_cmp(&qp, &q).unwrap() == std::cmp::Ordering::Less) as i64;
        if let (Ok(a), Ok(b)) = (f.rotate_by_lifted(&q, w), f.rotate_by_lifted(&qp, w + v + carry)) {
            if let Ok(ab) = a.rotate_by_lifted(&p, v) {
                prop_assert_eq!(ab, b);
            }
        }
    }

    #[test]
    fn rotations_compose_within_a_half_turn(seed in any::<u64>(), n in 1usize..=4, q in rotation(), p in rotation()) {
        // arguments lifted to (-pi, pi] add up when the total stays in that range
        let mut r = rng(seed);
        let c = random_config(&mut r, n, 0.4);
        let f = random_perv(&mut r, c, 2);
        let angle = |z: &GaussRat| { let (x, y) = z.to_f64(); y.atan2(x) };
        let total = angle(&q) + angle(&p);
        prop_assume!(total > -std::f64::consts::PI + 1e-9 && total <= std::f64::consts::PI + 1e-9);
        if let (Ok(a), Ok(b)) = (f.rotate_by(&q), f.rotate_by(&(&q * &p))) {
            if let Ok(ab) = a.rotate_by(&p) {
                prop_assert_eq!(ab, b);
            }
        }
    }

    #[test]
    fn direct_sum_is_associative_and_commutative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let next = |r: &mut _| { let c = random_config(r, 2, 0.0); random_perv(r, c, 2) };
        let (f, g, h) = (next(&mut r), next(&mut r), next(&mut r));
        let left = f.direct_sum(&g).and_then(|fg| fg.direct_sum(&h));
        let right = g.direct_sum(&h).and_then(|gh| f.direct_sum(&gh));
        if let (Ok(left), Ok(right)) = (left, right) {
            prop_assert_eq!(left, right);
        }
        if let (Ok(fg), Ok(gf)) = (f.direct_sum(&g), g.direct_sum(&f)) {
            // point labels agree after a relabelling; blocks swap where points coincide
            prop_assert_eq!(fg.total_dim(), gf.total_dim());
            for i in 0..fg.len() {
                let j = gf.config().index_of(fg.point(i)).unwrap();
                prop_assert_eq!(fg.dim(i), gf.dim(j));
                prop_assert_eq!(fg.phi(i).monodromy().char_poly().unwrap(), gf.phi(j).monodromy().char_poly().unwrap());
            }
        }
    }
}

#[test]
fn sums_with_disjoint_supports_commute_exactly() {
    let mut r = rng(7);
    let a = random_perv(&mut r, conf(&[(0, 0), (1, 2)]), 2);
    let b = LocalizedPerv::new(
        conf(&[(5, 3), (-2, 7)]),
        vec![
            CircleLocalSystem::new(random_invertible(&mut r, 2)).unwrap(),
            CircleLocalSystem::trivial(1),
        ],
        [((0, 1), random_matrix(&mut r, 1, 2))]
            .into_iter()
            .collect(),
    )
    .unwrap();
    let ab = a.direct_sum(&b).unwrap();
    let ba = b.direct_sum(&a).unwrap();
    assert_eq!(ab.reorder(&[2, 3, 0, 1]).unwrap(), ba);
}
