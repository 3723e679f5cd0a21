//! Identity suites run by `check`. Every check reports how many cases it
//! evaluated and, on failure, the first counterexample as JSON.

use serde_json::{json, Value};

use locperv::convolution::{convolve, split_transport, TensorIndex};
use locperv::deformation::{certify, perturb, specialize, Perturbation};
use locperv::fixtures::{random_perv, rng, Rng64};
use locperv::gmv::{from_gmv, to_gmv};
use locperv::serial::{
    gauss_to_json, matrix_to_json, parse, perv_from_json, perv_to_json, to_pretty,
};
use locperv::stokes::{
    c_omega_multiplicativity_check, ft_conjugator, ft_monodromy, leibniz_check, log_stokes_check,
    ray_differences, stokes_multiplicativity_check,
};
use locperv::transport::{alien_to_mplus, m_alien, minus_to_mplus};
use locperv::{
    gauss, rat, AlienMethod, Configuration, Frame, GaussRat, LocalizedPerv, QMatrix, QPerv, Sign,
    SignWord, TransportEngine,
};
use rand::Rng;

/// Longest avoidance words enumerated exhaustively.
const MAX_WORD: usize = 5;

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub witness: Option<Value>,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    pub fn to_json(&self) -> Value {
        json!({ "check": self.name, "cases": self.cases, "pass": self.passed(), "witness": self.witness })
    }
}

/// Independent descriptions of an object, when its origin provides them.
#[derive(Default)]
pub struct Context {
    pub factors: Option<(QPerv, QPerv, Vec<TensorIndex>)>,
    /// Data the object must equal, recomputed from its recipe.
    pub recomputed: Option<QPerv>,
    /// Lefschetz generator input, for the numeric transport comparison.
    pub lefschetz: Option<locperv_lefschetz::Lefschetz>,
}

struct Tally {
    name: &'static str,
    cases: usize,
    witness: Option<Value>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            witness: None,
        }
    }

    fn case(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn fail(&mut self, witness: Value) {
        self.case(false, || witness);
    }

    fn done(self) -> CheckResult {
        CheckResult {
            name: self.name,
            cases: self.cases,
            witness: self.witness,
        }
    }
}

fn pairs(f: &QPerv) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..f.len()).flat_map(move |i| (0..f.len()).filter(move |&j| j != i).map(move |j| (i, j)))
}

fn mismatch(pair: (usize, usize), what: &str, lhs: &QMatrix, rhs: &QMatrix) -> Value {
    json!({ "pair": format!("{}->{}", pair.0, pair.1), "what": what, "lhs": matrix_to_json(lhs), "rhs": matrix_to_json(rhs) })
}

fn short_words(f: &QPerv, i: usize, j: usize) -> Vec<SignWord> {
    let r = f.intermediates(i, j).len();
    if r > MAX_WORD {
        return vec![SignWord::all(Sign::Plus, r), SignWord::all(Sign::Minus, r)];
    }
    SignWord::enumerate(r).collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    items
        .iter()
        .flat_map(|&x| {
            let rest: Vec<usize> = items.iter().copied().filter(|&y| y != x).collect();
            permutations(&rest).into_iter().map(move |mut p| {
                p.insert(0, x);
                p
            })
        })
        .collect()
}

fn check_shapes(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("shapes");
    for (i, j) in pairs(f) {
        let m = f.mplus(i, j);
        t.case(
            m.shape() == (f.dim(j), f.dim(i)),
            || json!({ "pair": format!("{i}->{j}"), "shape": [m.rows(), m.cols()] }),
        );
    }
    for i in 0..f.len() {
        t.case(
            f.phi(i)
                .monodromy()
                .det()
                .map(|d| d != rat(0, 1))
                .unwrap_or(false),
            || json!({ "point": i, "what": "singular monodromy" }),
        );
    }
    t.done()
}

fn check_json(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("json-round-trip");
    let text = to_pretty(&perv_to_json(f));
    let back: Option<QPerv> = parse(&text).ok().and_then(|v| perv_from_json(&v).ok());
    let ok = back
        .as_ref()
        .is_some_and(|g| g == f && to_pretty(&perv_to_json(g)) == text);
    t.case(
        ok,
        || json!({ "what": "serialized form does not reproduce the object" }),
    );
    t.done()
}

/// All-minus transports: flip recursion, sum over chains, last-stop recursion.
fn check_expansion(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("pl-chain-expansion");
    let e = TransportEngine::new(f);
    for (i, j) in pairs(f) {
        let r = f.intermediates(i, j).len();
        let flips = e
            .m_eps(i, j, &SignWord::all(Sign::Minus, r))
            .expect("valid pair");
        let chains = e.m_minus_subset_sum(i, j).expect("valid pair");
        let last = e.m_minus_by_last_stop(i, j).expect("valid pair");
        t.case(flips == chains, || {
            mismatch((i, j), "flips vs chains", &flips, &chains)
        });
        t.case(flips == last, || {
            mismatch((i, j), "flips vs last stop", &flips, &last)
        });
    }
    t.done()
}

/// One flip changes a transport by the product through the flipped point.
fn check_single_flip(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("pl-single-flip");
    let e = TransportEngine::new(f);
    for (i, j) in pairs(f) {
        let inter = f.intermediates(i, j);
        for w in short_words(f, i, j) {
            for (k, &c) in inter.iter().enumerate() {
                if w.0[k] != Sign::Minus {
                    continue;
                }
                let mut plus = w.clone();
                plus.0[k] = Sign::Plus;
                let before = SignWord(w.0[..k].to_vec());
                let after = SignWord(w.0[k + 1..].to_vec());
                let lhs = e.m_eps(i, j, &w).expect("valid word");
                let via = &(&e.m_eps(c, j, &after).expect("valid word") * &e.junction(c, i, j))
                    * &e.m_eps(i, c, &before).expect("valid word");
                let rhs = &e.m_eps(i, j, &plus).expect("valid word") + &via;
                t.case(lhs == rhs, || {
                    mismatch((i, j), &format!("flip at {c} in {w}"), &lhs, &rhs)
                });
            }
        }
    }
    t.done()
}

fn check_confluence(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("flip-confluence");
    let e = TransportEngine::new(f);
    for (i, j) in pairs(f) {
        if f.intermediates(i, j).len() > MAX_WORD {
            continue;
        }
        for w in short_words(f, i, j) {
            let reference = e.m_eps(i, j, &w).expect("valid word");
            let minus: Vec<usize> = (0..w.len()).filter(|&k| w.0[k] == Sign::Minus).collect();
            for order in permutations(&minus) {
                let m = e.m_eps_by_flips(i, j, &w, &order).expect("valid order");
                t.case(m == reference, || {
                    mismatch(
                        (i, j),
                        &format!("word {w}, flip order {order:?}"),
                        &m,
                        &reference,
                    )
                });
            }
        }
    }
    t.done()
}

fn check_composition(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("pl-composition");
    let e = TransportEngine::new(f);
    for (i, j) in pairs(f) {
        if f.intermediates(i, j).len() > MAX_WORD {
            continue;
        }
        let (lhs, rhs) = e.compose_chain(i, j).expect("valid pair");
        t.case(lhs == rhs, || {
            mismatch(
                (i, j),
                "product through all points vs signed word sum",
                &lhs,
                &rhs,
            )
        });
    }
    t.done()
}

fn check_alien(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("alien-weights");
    let e = TransportEngine::new(f);
    for (i, j) in pairs(f) {
        if f.intermediates(i, j).len() > MAX_WORD + 1 {
            continue;
        }
        let a = e.m_alien(i, j, AlienMethod::SubsetSum).expect("valid pair");
        let b = e
            .m_alien(i, j, AlienMethod::EcalleWeights)
            .expect("valid pair");
        t.case(a == b, || {
            mismatch((i, j), "subset sum vs word weights", &a, &b)
        });
    }
    t.done()
}

fn check_inversions(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("presentation-inversion");
    let alien = pairs(f)
        .map(|(i, j)| {
            (
                (i, j),
                m_alien(f, i, j, AlienMethod::EcalleWeights, Frame::Based).expect("valid pair"),
            )
        })
        .collect();
    let e = TransportEngine::new(f);
    let minus = pairs(f)
        .map(|(i, j)| {
            (
                (i, j),
                e.m_eps(
                    i,
                    j,
                    &SignWord::all(Sign::Minus, f.intermediates(i, j).len()),
                )
                .expect("valid pair"),
            )
        })
        .collect();
    for (what, g) in [
        (
            "from alien transports",
            alien_to_mplus(f.config().clone(), f.phis().to_vec(), &alien),
        ),
        (
            "from left-avoiding transports",
            minus_to_mplus(f.config().clone(), f.phis().to_vec(), &minus),
        ),
    ] {
        match g {
            Ok(g) => {
                for (i, j) in pairs(f) {
                    t.case(g.mplus(i, j) == f.mplus(i, j), || {
                        mismatch((i, j), what, g.mplus(i, j), f.mplus(i, j))
                    });
                }
            }
            Err(err) => t.fail(json!({ "what": what, "error": err.to_string() })),
        }
    }
    t.done()
}

fn check_stokes(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("stokes-log");
    for zeta in f.config().stokes_directions() {
        match log_stokes_check(f, &zeta) {
            Ok(ok) => t.case(ok, || json!({ "direction": gauss_to_json(&zeta), "what": "log St differs from the sum of alien derivations" })),
            Err(err) => t.fail(json!({ "direction": gauss_to_json(&zeta), "error": err.to_string() })),
        }
    }
    t.done()
}

fn generic_directions(f: &QPerv) -> Vec<GaussRat> {
    [
        gauss(1, 0),
        gauss(7, 3),
        gauss(-5, 2),
        gauss(-3, -8),
        gauss(11, -4),
    ]
    .into_iter()
    .filter(|z| !f.config().is_stokes_direction(z).unwrap_or(true))
    .collect()
}

fn check_ft(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("fourier-monodromy");
    let dirs = generic_directions(f);
    for a in &dirs {
        for b in &dirs {
            let (ma, mb, p) = (
                ft_monodromy(f, a),
                ft_monodromy(f, b),
                ft_conjugator(f, a, b),
            );
            match (ma, mb, p) {
                (Ok(ma), Ok(mb), Ok(p)) => {
                    let lhs = &mb * &p;
                    let rhs = &p * &ma;
                    t.case(lhs == rhs, || json!({ "from": gauss_to_json(a), "to": gauss_to_json(b), "lhs": matrix_to_json(&lhs), "rhs": matrix_to_json(&rhs) }));
                }
                _ => t.fail(json!({ "from": gauss_to_json(a), "to": gauss_to_json(b), "what": "evaluation failed" })),
            }
        }
    }
    t.done()
}

fn check_unit(f: &QPerv) -> CheckResult {
    let mut t = Tally::new("unit-law");
    let one = LocalizedPerv::unit();
    for (what, c) in [("F * 1", convolve(f, &one)), ("1 * F", convolve(&one, f))] {
        match c {
            Ok(c) => t.case(
                &c.perv == f,
                || json!({ "what": what, "got": perv_to_json(&c.perv) }),
            ),
            Err(err) => t.fail(json!({ "what": what, "error": err.to_string() })),
        }
    }
    t.done()
}

fn check_gmv(f: &QPerv) -> Option<CheckResult> {
    if !f.config().is_convex_position() {
        return None;
    }
    let mut t = Tally::new("gmv-round-trip");
    let n = f.len();
    let orders: Vec<Vec<usize>> = vec![(0..n).collect(), (0..n).rev().collect()];
    for order in orders {
        match to_gmv(f, &order)
            .and_then(|q| Ok((q.sylvester_holds(), from_gmv(&q, f.config(), &order)?)))
        {
            Ok((sylvester, back)) => {
                t.case(
                    sylvester,
                    || json!({ "order": order, "what": "Sylvester determinant identity" }),
                );
                t.case(
                    &back == f,
                    || json!({ "order": order, "what": "round trip", "got": perv_to_json(&back) }),
                );
            }
            Err(err) => t.fail(json!({ "order": order, "error": err.to_string() })),
        }
    }
    Some(t.done())
}

/// Small seeded motion into general position.
fn generic_motion(f: &QPerv, r: &mut Rng64) -> Option<Perturbation> {
    let extent = f
        .config()
        .points()
        .iter()
        .map(|p| p.to_f64())
        .fold(1.0f64, |m, (x, y)| m.max(x.abs()).max(y.abs()));
    let scale = 40 * extent.ceil() as i64;
    for _ in 0..200 {
        let d = (0..f.len())
            .map(|_| {
                GaussRat::new(
                    rat(r.gen_range(-4..=4), scale),
                    rat(r.gen_range(-4..=4), scale),
                )
            })
            .collect();
        let p = Perturbation::new(d);
        if let Ok((moved, _)) = certify(f.config(), &p) {
            if moved.is_general_position() {
                return Some(p);
            }
        }
    }
    None
}

fn check_deformation(f: &QPerv, r: &mut Rng64) -> Option<CheckResult> {
    f.config().collinear_triple()?;
    let mut t = Tally::new("perturb-specialize");
    let Some(p) = generic_motion(f, r) else {
        t.fail(json!({ "what": "no admissible motion found" }));
        return Some(t.done());
    };
    match perturb(f, &p).and_then(|(g, cert)| Ok((specialize(&g, f.config(), &cert)?, g, cert))) {
        Ok((back, g, cert)) => {
            t.case(
                &back == f,
                || json!({ "what": "specialize after perturb", "got": perv_to_json(&back) }),
            );
            for (&(i, j), w) in &cert.sides {
                let expected =
                    locperv::transport::m_eps(f, i, j, w, Frame::Based).expect("valid word");
                t.case(g.mplus(i, j) == &expected, || {
                    mismatch(
                        (i, j),
                        &format!("moved transport vs word {w}"),
                        g.mplus(i, j),
                        &expected,
                    )
                });
            }
        }
        Err(err) => t.fail(json!({ "error": err.to_string() })),
    }
    Some(t.done())
}

/// A two-point partner along one of the object's Stokes directions, so that
/// the sum configuration has many collinear points.
fn partner(f: &QPerv, r: &mut Rng64) -> Option<QPerv> {
    let dirs = f.config().stokes_directions();
    for _ in 0..50 {
        let d = if dirs.is_empty() || r.gen_bool(0.2) {
            gauss(r.gen_range(-3..=3), r.gen_range(1..=3))
        } else {
            dirs[r.gen_range(0..dirs.len())].scale(&rat(r.gen_range(1..=2), 1))
        };
        let base = gauss(r.gen_range(-2..=2), r.gen_range(-2..=2));
        let Ok(c) = Configuration::new(vec![base.clone(), &base + &d]) else {
            continue;
        };
        if c.horizontal_pair().is_some() {
            continue;
        }
        let g = random_perv(r, c, 2);
        if convolve(f, &g).is_ok() {
            return Some(g);
        }
    }
    None
}

fn check_products(f: &QPerv, r: &mut Rng64) -> Vec<CheckResult> {
    let mut st = Tally::new("stokes-multiplicativity");
    let mut lb = Tally::new("leibniz");
    for _ in 0..2 {
        let Some(g) = partner(f, r) else {
            st.fail(json!({ "what": "no partner without horizontal pairs" }));
            break;
        };
        let fg = convolve(f, &g).expect("checked");
        for zeta in fg.perv.config().stokes_directions() {
            let ok = stokes_multiplicativity_check(f, &g, &zeta, Sign::Minus).unwrap_or(false);
            st.case(
                ok,
                || json!({ "partner": perv_to_json(&g), "direction": gauss_to_json(&zeta) }),
            );
            for w in ray_differences(&fg.perv, &zeta) {
                let ok = c_omega_multiplicativity_check(f, &g, &w, Sign::Minus).unwrap_or(false);
                st.case(ok, || json!({ "partner": perv_to_json(&g), "difference": gauss_to_json(&w), "what": "graded part" }));
                let ok = leibniz_check(f, &g, &w).unwrap_or(false);
                lb.case(
                    ok,
                    || json!({ "partner": perv_to_json(&g), "difference": gauss_to_json(&w) }),
                );
            }
        }
    }
    vec![st.done(), lb.done()]
}

fn check_factors(
    f: &QPerv,
    left: &QPerv,
    right: &QPerv,
    index: &[TensorIndex],
) -> Vec<CheckResult> {
    let mut ts = Tally::new("thom-sebastiani");
    let same_points = f.len() == index.len()
        && index
            .iter()
            .enumerate()
            .all(|(k, t)| f.point(k) == &t.point);
    ts.case(
        same_points,
        || json!({ "what": "points differ from the sums of factor points" }),
    );
    if !same_points {
        return vec![ts.done()];
    }
    for (k, t) in index.iter().enumerate() {
        ts.case(
            f.dim(k) == t.dim(),
            || json!({ "point": k, "dim": f.dim(k), "expected": t.dim() }),
        );
        let blocks: Vec<QMatrix> = t
            .splittings
            .iter()
            .map(|s| {
                left.phi(s.left)
                    .monodromy()
                    .kron(right.phi(s.right).monodromy())
            })
            .collect();
        let expected = QMatrix::block_diag(&blocks);
        ts.case(f.phi(k).monodromy() == &expected, || json!({ "point": k, "monodromy": matrix_to_json(f.phi(k).monodromy()), "expected": matrix_to_json(&expected) }));
    }
    let mut tt = Tally::new("tensor-transports");
    let mut dz = Tally::new("diagonal-zero");
    let e = TransportEngine::new(f);
    for (c, d) in pairs(f) {
        let r = f.intermediates(c, d).len();
        let stored = e
            .m_eps(c, d, &SignWord::all(Sign::Minus, r))
            .expect("valid pair");
        let split = split_transport(left, right, index, c, d, Sign::Minus);
        tt.case(stored == split, || {
            mismatch(
                (c, d),
                "left-avoiding transport vs tensor formula",
                &stored,
                &split,
            )
        });
        if r == 0 && split.is_zero() {
            dz.case(f.mplus(c, d).is_zero(), || {
                mismatch(
                    (c, d),
                    "no parallel legs but nonzero transport",
                    f.mplus(c, d),
                    &split,
                )
            });
        }
    }
    vec![ts.done(), tt.done(), dz.done()]
}

fn check_recomputed(f: &QPerv, g: &QPerv) -> CheckResult {
    let mut t = Tally::new("provenance");
    t.case(
        f.config() == g.config() && f.phis() == g.phis(),
        || json!({ "what": "points or local systems differ from the recipe" }),
    );
    if f.config() == g.config() {
        for (i, j) in pairs(f) {
            t.case(f.mplus(i, j) == g.mplus(i, j), || {
                mismatch((i, j), "stored vs recomputed", f.mplus(i, j), g.mplus(i, j))
            });
        }
    }
    t.done()
}

fn check_lefschetz(f: &QPerv, l: &locperv_lefschetz::Lefschetz) -> CheckResult {
    let mut t = Tally::new("lefschetz-numeric");
    let minus_one = QMatrix::from_ints(&[[-1]]);
    for i in 0..f.len() {
        t.case(
            f.phi(i).monodromy() == &minus_one,
            || json!({ "point": i, "what": "local monodromy is not -1" }),
        );
    }
    if f.config() != l.perv().config() {
        t.fail(json!({ "what": "configuration differs from the generator" }));
        return t.done();
    }
    let e = TransportEngine::new(f);
    for (i, j) in pairs(f) {
        for w in short_words(f, i, j) {
            match l.transport(i, j, &w) {
                Ok(numeric) => {
                    let exact = e.m_eps(i, j, &w).expect("valid word");
                    t.case(numeric == exact, || {
                        mismatch(
                            (i, j),
                            &format!("numeric vs exact, word {w}"),
                            &numeric,
                            &exact,
                        )
                    });
                }
                Err(err) => {
                    t.fail(json!({ "pair": format!("{i}->{j}"), "error": err.to_string() }))
                }
            }
        }
    }
    t.done()
}

/// Runs every applicable suite; `seed` drives the randomized ones.
pub fn run_suite(f: &QPerv, ctx: &Context, seed: u64) -> Vec<CheckResult> {
    let mut r = rng(seed);
    let mut out = vec![
        check_shapes(f),
        check_json(f),
        check_expansion(f),
        check_single_flip(f),
        check_confluence(f),
        check_composition(f),
        check_alien(f),
        check_inversions(f),
        check_stokes(f),
        check_ft(f),
        check_unit(f),
    ];
    out.extend(check_gmv(f));
    out.extend(check_deformation(f, &mut r));
    out.extend(check_products(f, &mut r));
    if let Some((left, right, index)) = &ctx.factors {
        out.extend(check_factors(f, left, right, index));
    }
    if let Some(g) = &ctx.recomputed {
        out.push(check_recomputed(f, g));
    }
    if let Some(l) = &ctx.lefschetz {
        out.push(check_lefschetz(f, l));
    }
    out
}
