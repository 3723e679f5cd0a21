//! Seeded random objects and a catalogue of named examples.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gauss::{gauss, GaussRat};
use crate::geometry::Configuration;
use crate::matrix::Matrix;
use crate::scalar::{rat, Rational};
use crate::sheaf::{CircleLocalSystem, LocalizedPerv};
use crate::QPerv;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small rational with numerator in `[-3, 3]` and denominator in `{1, 2, 3}`.
pub fn small_rational<R: Rng>(rng: &mut R) -> Rational {
    rat(rng.gen_range(-3..=3), rng.gen_range(1..=3))
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix<Rational> {
    let data = (0..rows * cols).map(|_| small_rational(rng)).collect();
    Matrix::from_vec(rows, cols, data).expect("sized")
}

/// Invertible: a unipotent lower factor times an upper factor with diagonal in `{+-1, +-2}`.
pub fn random_invertible<R: Rng>(rng: &mut R, n: usize) -> Matrix<Rational> {
    let mut lower = Matrix::identity(n);
    let mut upper = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            if i > j {
                lower[(i, j)] = small_rational(rng);
            } else if i < j {
                upper[(i, j)] = small_rational(rng);
            } else {
                upper[(i, j)] = rat(*[-2, -1, 1, 2].choose(rng).expect("nonempty"), 1);
            }
        }
    }
    &lower * &upper
}

/// Random data on a given configuration with dims in `1..=max_dim`.
pub fn random_perv<R: Rng>(rng: &mut R, config: Configuration, max_dim: usize) -> QPerv {
    let dims: Vec<usize> = (0..config.len())
        .map(|_| rng.gen_range(1..=max_dim))
        .collect();
    random_perv_with_dims(rng, config, &dims)
}

pub fn random_perv_with_dims<R: Rng>(rng: &mut R, config: Configuration, dims: &[usize]) -> QPerv {
    let phi = dims
        .iter()
        .map(|&d| CircleLocalSystem::new(random_invertible(rng, d)).expect("invertible"))
        .collect();
    let mut m = BTreeMap::new();
    for (i, &di) in dims.iter().enumerate() {
        for (j, &dj) in dims.iter().enumerate() {
            if i != j {
                m.insert((i, j), random_matrix(rng, dj, di));
            }
        }
    }
    LocalizedPerv::new(config, phi, m).expect("valid random data")
}

/// Non-horizontal primitive directions used for collinear families.
const SLOPES: [(i64, i64); 6] = [(1, 1), (1, 2), (2, 1), (-1, 1), (1, -2), (0, 1)];

pub fn random_slope<R: Rng>(rng: &mut R) -> GaussRat {
    let (a, b) = *SLOPES.choose(rng).expect("nonempty");
    gauss(a, b)
}

/// `n` distinct points `base + k v` on one line, in random order.
pub fn collinear_config<R: Rng>(rng: &mut R, n: usize) -> Configuration {
    let v = random_slope(rng);
    let base = gauss(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
    let mut ks: Vec<i64> = (-4..=4).collect();
    ks.shuffle(rng);
    let pts = ks[..n]
        .iter()
        .map(|&k| &base + &v.scale(&rat(k, 1)))
        .collect();
    Configuration::new(pts).expect("distinct")
}

/// Random lattice points without horizontal pairs; `line_bias` is the
/// chance that a new point is put on a line through two earlier ones.
pub fn random_config<R: Rng>(rng: &mut R, n: usize, line_bias: f64) -> Configuration {
    loop {
        let mut pts: Vec<GaussRat> = Vec::new();
        let mut tries = 0;
        while pts.len() < n && tries < 200 {
            tries += 1;
            let p = if pts.len() >= 2 && rng.gen_bool(line_bias) {
                let a = pts.choose(rng).expect("nonempty").clone();
                let b = pts.choose(rng).expect("nonempty").clone();
                if a == b {
                    continue;
                }
                let k = *[-1i64, 2, 3].choose(rng).expect("nonempty");
                &a + &(&b - &a).scale(&rat(k, 1))
            } else {
                gauss(rng.gen_range(-3..=3), rng.gen_range(-3..=3))
            };
            if pts.iter().all(|q| q != &p && q.im != p.im) {
                pts.push(p);
            }
        }
        if pts.len() == n {
            return Configuration::new(pts).expect("distinct");
        }
    }
}

/// A pair whose sum configuration is collinear-rich and free of horizontal pairs.
pub fn random_collinear_pair<R: Rng>(
    rng: &mut R,
    max_points: usize,
    max_dim: usize,
) -> (QPerv, QPerv) {
    loop {
        let v = random_slope(rng);
        let side = |rng: &mut R| -> Option<Configuration> {
            let n = rng.gen_range(1..=max_points);
            let base = gauss(rng.gen_range(-2..=2), rng.gen_range(-2..=2));
            let mut pts: Vec<GaussRat> = Vec::new();
            for _ in 0..n {
                let p = if rng.gen_bool(0.8) {
                    &base + &v.scale(&rat(rng.gen_range(-3..=3), 1))
                } else {
                    gauss(rng.gen_range(-3..=3), rng.gen_range(-3..=3))
                };
                if !pts.contains(&p) {
                    pts.push(p);
                }
            }
            let c = Configuration::new(pts).ok()?;
            c.horizontal_pair().is_none().then_some(c)
        };
        let (Some(cf), Some(cg)) = (side(rng), side(rng)) else {
            continue;
        };
        let sums: Vec<GaussRat> = cf
            .points()
            .iter()
            .flat_map(|a| cg.points().iter().map(move |b| a + b))
            .collect();
        let mut uniq: Vec<GaussRat> = Vec::new();
        for s in sums {
            if !uniq.contains(&s) {
                uniq.push(s);
            }
        }
        if Configuration::new(uniq)
            .map(|c| c.horizontal_pair().is_none())
            .unwrap_or(false)
        {
            return (random_perv(rng, cf, max_dim), random_perv(rng, cg, max_dim));
        }
    }
}

fn ints(m: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_ints(m)
}

/// The two factors of fixtures defined as convolutions.
pub fn fixture_factors(name: &str) -> Option<(QPerv, QPerv)> {
    let one = || ints(&[&[1]]);
    let neg = || ints(&[&[-1]]);
    match name {
        "parallelogram" => Some((
            build(
                vec![gauss(0, 0), gauss(2, 1)],
                vec![neg(), one()],
                &[((0, 1), ints(&[&[2]])), ((1, 0), ints(&[&[3]]))],
            ),
            build(
                vec![gauss(0, 0), gauss(-1, 3)],
                vec![one(), neg()],
                &[((0, 1), ints(&[&[5]])), ((1, 0), ints(&[&[7]]))],
            ),
        )),
        _ => None,
    }
}

fn build(
    points: Vec<GaussRat>,
    monodromies: Vec<Matrix<Rational>>,
    transports: &[((usize, usize), Matrix<Rational>)],
) -> QPerv {
    let config = Configuration::new(points).expect("fixture points");
    let phi = monodromies
        .into_iter()
        .map(|t| CircleLocalSystem::new(t).expect("invertible"))
        .collect();
    LocalizedPerv::new(config, phi, transports.iter().cloned().collect()).expect("fixture data")
}

/// Names accepted by [`fixture`], in catalogue order.
pub const FIXTURES: [&str; 8] = [
    "unit",
    "skyscraper2",
    "segment",
    "cubic",
    "collinear3",
    "collinear4",
    "triangle",
    "parallelogram",
];

pub fn fixture(name: &str) -> Option<QPerv> {
    let one = || ints(&[&[1]]);
    let neg = || ints(&[&[-1]]);
    Some(match name {
        "unit" => LocalizedPerv::unit(),
        "skyscraper2" => LocalizedPerv::skyscraper(gauss(1, 1), 2).expect("rank two"),
        "segment" => build(
            vec![gauss(0, 0), gauss(1, 2)],
            vec![neg(), ints(&[&[2]])],
            &[((0, 1), ints(&[&[3]])), ((1, 0), ints(&[&[5]]))],
        ),
        // Critical values of x^3 - 3x after rotation by 2 + i.
        "cubic" => build(
            vec![gauss(-4, -2), gauss(4, 2)],
            vec![neg(), neg()],
            &[((0, 1), neg()), ((1, 0), neg())],
        ),
        "collinear3" => build(
            vec![gauss(0, 0), gauss(1, 1), gauss(2, 2)],
            vec![one(), neg(), ints(&[&[2]])],
            &[
                ((0, 1), ints(&[&[2]])),
                ((1, 2), ints(&[&[3]])),
                ((0, 2), ints(&[&[5]])),
                ((2, 0), ints(&[&[-1]])),
                ((2, 1), ints(&[&[1]])),
                ((1, 0), ints(&[&[4]])),
            ],
        ),
        "collinear4" => build(
            vec![gauss(0, 0), gauss(1, 2), gauss(2, 4), gauss(3, 6)],
            vec![one(), ints(&[&[1, 1], &[0, 1]]), neg(), ints(&[&[2]])],
            &[
                ((0, 1), ints(&[&[1], &[2]])),
                ((1, 2), ints(&[&[1, -1]])),
                ((2, 3), ints(&[&[3]])),
                ((0, 2), ints(&[&[2]])),
                ((1, 3), ints(&[&[1, 1]])),
                ((0, 3), ints(&[&[-1]])),
                ((3, 0), ints(&[&[1]])),
                ((3, 1), ints(&[&[0], &[1]])),
                ((2, 0), ints(&[&[2]])),
            ],
        ),
        "triangle" => build(
            vec![gauss(0, 0), gauss(3, 1), gauss(1, 3)],
            vec![neg(), neg(), neg()],
            &[
                ((0, 1), one()),
                ((1, 0), one()),
                ((1, 2), neg()),
                ((2, 1), neg()),
                ((0, 2), ints(&[&[2]])),
                ((2, 0), one()),
            ],
        ),
        "parallelogram" => {
            let (f, g) = fixture_factors(name)?;
            crate::convolution::convolve(&f, &g)
                .expect("no horizontal pair")
                .perv
        }
        _ => return None,
    })
}
