//! The acceptance checks as a library: each criterion is a named, timed check
//! with a runtime limit, grouped by the module it exercises. The `delta2 verify`
//! command and the `acceptance` test target both run this suite.

use std::fmt;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::capacity::{
    capacity_certificate, capacity_opts, lemma2_table, mc_estimate, snr, theorem1_check, Fading, Kernel,
};
use crate::constructions::{
    build_bump_train, build_star_pdf, g_jet, g_pieces, integral_g, moment_enclosure, phi_interval, psi_point,
    BumpTrainOptions, StarOptions,
};
use crate::error::{Error, Result};
use crate::exact::{log2_enclosure, Interval, Rational};
use crate::fixtures;
use crate::golden::{self, GenPdfGolden, OracleGolden, SpeckerGolden, Theorem1Golden};
use crate::hierarchy::{delta2_anytime, sigma1_shift, Delta2Cert, Pi1Cert, REEnumerator, Sigma1Cert, SpeckerNumber};
use crate::oracle::bump_capacity_closed_form;
use crate::quad::{integrate, Jet, Piece, QuadOptions};
use crate::rng::CounterRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Constructions,
    Capacity,
    Hierarchy,
    Golden,
}

pub const SUITES: [Suite; 4] = [Suite::Constructions, Suite::Capacity, Suite::Hierarchy, Suite::Golden];

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Constructions => "constructions",
            Suite::Capacity => "capacity",
            Suite::Hierarchy => "hierarchy",
            Suite::Golden => "golden",
        })
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        SUITES.into_iter().find(|x| x.to_string() == s).ok_or_else(|| {
            Error::Validation(format!("unknown suite {s:?}; known: constructions, capacity, hierarchy, golden"))
        })
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub golden_dir: PathBuf,
    /// Empty runs every suite.
    pub only: Vec<Suite>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { golden_dir: golden::default_dir(), only: Vec::new(), seed: DEFAULT_SEED }
    }
}

pub const DEFAULT_SEED: u64 = 20_240_601;

/// What a check found: whether it holds, how many instances it covered, and a summary.
#[derive(Clone, Debug)]
pub struct Finding {
    pub holds: bool,
    pub count: u64,
    pub detail: String,
}

impl Finding {
    fn new(holds: bool, count: u64, detail: impl Into<String>) -> Finding {
        Finding { holds, count, detail: detail.into() }
    }
}

type CheckFn = fn(&VerifyOptions) -> Result<Finding>;

pub struct Check {
    pub id: &'static str,
    pub suite: Suite,
    pub title: &'static str,
    pub limit: Duration,
    run: CheckFn,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub suite: Suite,
    pub title: String,
    /// The property held and the check finished within its limit.
    pub passed: bool,
    pub holds: bool,
    pub count: u64,
    pub detail: String,
    pub elapsed_ms: u64,
    pub limit_ms: u64,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {:<4} {} ({} cases, {:.2}s / {}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.id,
            self.title,
            self.count,
            self.elapsed_ms as f64 / 1000.0,
            self.limit_ms / 1000,
            self.detail
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub checks: Vec<CheckReport>,
    pub passed: u64,
    pub failed: u64,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}

const fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

/// Every check, in order. Ids `c1`..`c10` are the acceptance criteria.
pub fn checks() -> Vec<Check> {
    vec![
        Check { id: "c1", suite: Suite::Constructions, title: "bump mass is 1/2", limit: secs(1), run: bump_mass },
        Check {
            id: "c2",
            suite: Suite::Constructions,
            title: "Psi(n) = M(n) and Phi(Psi(u)) = u",
            limit: secs(10),
            run: psi_moment,
        },
        Check {
            id: "c3",
            suite: Suite::Constructions,
            title: "bump-train mass brackets 1, narrowing",
            limit: secs(30),
            run: train_mass,
        },
        Check {
            id: "c4",
            suite: Suite::Constructions,
            title: "log-moment equals sum of d_n",
            limit: secs(60),
            run: log_moment,
        },
        Check {
            id: "c5",
            suite: Suite::Capacity,
            title: "tail of x_m below sigma^2/(mP)",
            limit: secs(60),
            run: lemma2_rate,
        },
        Check {
            id: "c6",
            suite: Suite::Capacity,
            title: "a_n, b_n monotone; symmetric channel null",
            limit: secs(60),
            run: capacity_monotone,
        },
        Check {
            id: "c7",
            suite: Suite::Capacity,
            title: "x + u(P) matches the capacity estimate",
            limit: secs(120),
            run: decomposition,
        },
        Check {
            id: "c8",
            suite: Suite::Capacity,
            title: "closed form, quadrature and Monte-Carlo agree",
            limit: secs(120),
            run: oracle_equivalence,
        },
        Check {
            id: "c9",
            suite: Suite::Hierarchy,
            title: "certificates, enumerators, Specker sums, shifts",
            limit: secs(30),
            run: hierarchy,
        },
        Check {
            id: "c10",
            suite: Suite::Constructions,
            title: "M(n) >= log2(n + 2) / 2",
            limit: secs(10),
            run: moment_bound,
        },
        Check {
            id: "g1",
            suite: Suite::Golden,
            title: "dovetail Specker prefix",
            limit: secs(10),
            run: golden_specker,
        },
        Check { id: "g2", suite: Suite::Golden, title: "gen-pdf geo-1 mass", limit: secs(10), run: golden_gen_pdf },
        Check { id: "g3", suite: Suite::Golden, title: "oracle-1 convergence", limit: secs(60), run: golden_oracle },
    ]
}

/// Runs one check, turning errors and panics into failures.
pub fn run_check(c: &Check, opts: &VerifyOptions) -> CheckReport {
    let start = Instant::now();
    let found = match catch_unwind(AssertUnwindSafe(|| (c.run)(opts))) {
        Ok(Ok(f)) => f,
        Ok(Err(e)) => Finding::new(false, 0, format!("error: {e}")),
        Err(p) => {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Finding::new(false, 0, format!("panic: {msg}"))
        }
    };
    let elapsed = start.elapsed();
    CheckReport {
        id: c.id.into(),
        suite: c.suite,
        title: c.title.into(),
        passed: found.holds && elapsed <= c.limit,
        holds: found.holds,
        count: found.count,
        detail: found.detail,
        elapsed_ms: elapsed.as_millis() as u64,
        limit_ms: c.limit.as_millis() as u64,
    }
}

/// Runs the selected suites; `each` sees every report as it completes.
pub fn run_suite(opts: &VerifyOptions, mut each: impl FnMut(&CheckReport)) -> SuiteReport {
    let mut out = Vec::new();
    for c in checks() {
        if !opts.only.is_empty() && !opts.only.contains(&c.suite) {
            continue;
        }
        let r = run_check(&c, opts);
        each(&r);
        out.push(r);
    }
    let passed = out.iter().filter(|r| r.passed).count() as u64;
    SuiteReport { failed: out.len() as u64 - passed, passed, checks: out }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::frac(n, d)
}

fn dec(x: &Rational) -> String {
    format!("{:.3e}", x.to_f64())
}

fn bump_mass(_: &VerifyOptions) -> Result<Finding> {
    let exact = integral_g() == q(1, 2);
    let zero = |_: &Jet| Ok(Jet::constant(Interval::zero()));
    let mut pieces = vec![Piece::new(q(0, 1), q(1, 1), zero)];
    for (i, (lo, hi, _, _)) in g_pieces().into_iter().enumerate() {
        pieces.push(Piece::new(lo, hi, move |x: &Jet| Ok(g_jet(i, x))));
    }
    pieces.push(Piece::new(q(4, 1), q(5, 1), zero));
    let tol = Rational::pow2(-20);
    let r = integrate(&pieces, &QuadOptions { tol: tol.clone(), budget: 1 << 12 })?;
    let holds = exact && r.enclosure.contains(&q(1, 2)) && r.enclosure.width() <= tol;
    Ok(Finding::new(holds, 2, format!("closed form exact: {exact}; quadrature width {}", dec(&r.enclosure.width()))))
}

fn psi_moment(opts: &VerifyOptions) -> Result<Finding> {
    let tol = Rational::pow2(-30);
    let mut worst = Rational::zero();
    for n in 1..=8u64 {
        let a = moment_enclosure(n, 34)?;
        let b = psi_point(&Rational::from(n), 34)?;
        worst = worst.max((&a - &b).max_abs());
    }
    let first = worst <= tol;
    let rt = Rational::pow2(-20);
    let mut round = Rational::zero();
    for i in 0..100u64 {
        // u uniform on a 2^-24 grid in [0, 16]
        let u = Rational::from(CounterRng::draw(opts.seed, i) >> 36).shl(-24);
        let back = phi_interval(&psi_point(&u, 40)?, 22)?;
        round = round.max((&back - &Interval::point(u)).max_abs());
    }
    Ok(Finding::new(
        first && round <= rt,
        108,
        format!("max |Psi(n) - M(n)| {}; max round-trip error {}", dec(&worst), dec(&round)),
    ))
}

fn train_mass(_: &VerifyOptions) -> Result<Finding> {
    let x1 = fixtures::geo_shifted();
    let mut widths = Vec::new();
    let mut brackets = true;
    for m in [8u64, 16, 32] {
        let p = build_bump_train(&x1, m, &BumpTrainOptions::default())?;
        let mass = p.truncated_mass();
        let enc = Interval::new(mass.lo().clone(), mass.hi() + &p.tail_mass(m))?;
        brackets &= enc.contains(&Rational::one());
        widths.push(enc.width());
    }
    let shrinking = widths.windows(2).all(|w| w[1] < w[0]);
    Ok(Finding::new(
        brackets && shrinking,
        3,
        format!("widths {}", widths.iter().map(dec).collect::<Vec<_>>().join(", ")),
    ))
}

fn log_moment(_: &VerifyOptions) -> Result<Finding> {
    let x1 = fixtures::geo_shifted();
    let one = Rational::one();
    let opts = capacity_opts();
    let mut holds = true;
    let mut notes = Vec::new();
    for m in [8u64, 16, 32] {
        let p = build_bump_train(&x1, m, &BumpTrainOptions::default())?;
        let sum_d = x1.term(m);
        let tail = p.tail_d(m);
        let via_psi = p.log_moment_truncated()?;
        // independent route: log2(a^2) = log2(1 + a^2) - log2(1 + a^-2)
        let f = Fading::Train(p.into());
        let cap = f.integrate(&Kernel::Capacity { snr: one.clone() }, None, &opts)?.enclosure;
        let exc = f.integrate(&Kernel::Excess { snr: one.clone() }, None, &opts)?.enclosure;
        let via_quad = &cap - &exc;
        let allowed = &(&via_psi.width() + &via_quad.width()) + &tail;
        let r_psi = (&via_psi.mid() - &sum_d).abs();
        let r_quad = (&via_quad.mid() - &sum_d).abs();
        holds &= r_psi <= allowed && r_quad <= allowed && via_psi.intersect(&via_quad).is_some();
        if m == 32 {
            holds &= r_psi.clone().max(r_quad.clone()) < q(1, 1000);
        }
        notes.push(format!("M={m}: residual {} / {} (allowed {})", dec(&r_psi), dec(&r_quad), dec(&allowed)));
    }
    Ok(Finding::new(holds, 3, notes.join("; ")))
}

fn lemma2_rate(_: &VerifyOptions) -> Result<Finding> {
    let star = build_star_pdf(&REEnumerator::identity(), 64, &StarOptions::default())?;
    let opts = QuadOptions { tol: Rational::pow2(-24), budget: 1 << 16 };
    let mut holds = true;
    let mut count = 0;
    let mut notes = Vec::new();
    for (p, s) in [(1i64, 1i64), (10, 1), (1, 4)] {
        let t = lemma2_table(&star, &Rational::from(p), &Rational::from(s), 256, &opts)?;
        let mut worst = 0.0f64;
        for m in 4..=256u64 {
            let (gap, rate) = (t.gap(m), t.rate(m));
            holds &= gap < rate;
            worst = worst.max(gap.to_f64() / rate.to_f64());
            count += 1;
        }
        notes.push(format!("P={p}, s2={s}: max gap/rate {worst:.4}"));
    }
    Ok(Finding::new(holds, count, notes.join("; ")))
}

fn capacity_monotone(_: &VerifyOptions) -> Result<Finding> {
    let mut holds = true;
    let mut count = 0;
    for name in ["pair-1", "pair-2"] {
        let cert = capacity_certificate(&fixtures::channel(name)?);
        for seq in [&cert.a_seq, &cert.b_seq] {
            let terms: Vec<Rational> = (1..=32).map(|n| seq.term(n)).collect();
            holds &= terms.windows(2).all(|w| w[0] <= w[1]);
            count += 32;
        }
    }
    let sym = capacity_certificate(&fixtures::channel("symmetric")?);
    let null = (0..=32).all(|n| delta2_anytime(&sym.as_delta2, n).is_zero());
    Ok(Finding::new(holds && null, count + 33, format!("monotone: {holds}; symmetric estimate identically 0: {null}")))
}

fn decomposition(opts: &VerifyOptions) -> Result<Finding> {
    let g: Theorem1Golden = golden::load(&opts.golden_dir, golden::THEOREM1_FILE)?;
    let one = Rational::one();
    let r = theorem1_check(&fixtures::geo_shifted(), &fixtures::geo_quarter(), &one, &one, &one, golden::THEOREM1_K)?;
    let same = r.residual == g.residual;
    Ok(Finding::new(
        r.passed && same,
        2,
        format!(
            "|residual| {} <= combined {}: {}; golden residual identical: {same}",
            dec(&r.residual.abs()),
            dec(&r.combined_error),
            r.passed
        ),
    ))
}

pub const MC_SAMPLES: u64 = 1_000_000;

fn oracle_equivalence(opts: &VerifyOptions) -> Result<Finding> {
    let mut holds = true;
    let mut notes = Vec::new();
    let fx = fixtures::single_bumps();
    for (i, (shift, power, sigma_sq)) in fx.iter().enumerate() {
        let c = snr(power, sigma_sq)?;
        let closed = bump_capacity_closed_form(shift, &c)?;
        let f = Fading::bump(shift.clone())?;
        let quad = f.integrate(&Kernel::Capacity { snr: c }, None, &capacity_opts())?.enclosure;
        let mc = mc_estimate(&f, power, sigma_sq, MC_SAMPLES, opts.seed.wrapping_add(i as u64))?;
        let contained = quad.contains_interval(&closed);
        let z_closed = (mc.mean - closed.mid().to_f64()).abs() / mc.std_err;
        let z_quad = ((mc.mean - quad.mid().to_f64()).abs() - quad.width().to_f64()).max(0.0) / mc.std_err;
        holds &= contained && z_closed <= 3.0 && z_quad <= 3.0;
        notes.push(format!("s={shift}: contained {contained}, MC z {z_closed:.2}"));
    }
    Ok(Finding::new(holds, 3 * fx.len() as u64, notes.join("; ")))
}

const HORIZON: u64 = 2048;

fn hierarchy(_: &VerifyOptions) -> Result<Finding> {
    let mut bad = Vec::new();
    let mut count = 0u64;
    let specker_id = SpeckerNumber::new(REEnumerator::identity());
    let specker_tm = SpeckerNumber::new(REEnumerator::dovetail_tm());
    let certs: Vec<Sigma1Cert> = vec![
        fixtures::geo_shifted(),
        fixtures::geo_quarter(),
        specker_id.to_sigma1(),
        specker_tm.to_sigma1(),
        sigma1_shift(&fixtures::geo_quarter(), &q(5, 2)),
    ];
    for c in &certs {
        if let Err(v) = c.check(HORIZON) {
            bad.push(format!("{}: {v}", c.label()));
        }
        count += 1;
    }
    let pi = Pi1Cert::negated(&fixtures::geo_shifted());
    if let Err(v) = pi.check(HORIZON) {
        bad.push(format!("{}: {v}", pi.label()));
    }
    count += 1;

    let table = REEnumerator::from_table(
        "primes",
        (2..).filter(|n: &u64| (2..*n).all(|d| !n.is_multiple_of(d))).take(100).collect(),
    )?;
    for e in [REEnumerator::identity(), REEnumerator::dovetail_tm(), table] {
        let p = e.prefix(100)?;
        let distinct: std::collections::HashSet<_> = p.iter().collect();
        if distinct.len() != 100 {
            bad.push(format!("{} repeats within 100 terms", e.label()));
        }
        count += 1;
    }

    for s in [&specker_id, &specker_tm] {
        let mut prev = Rational::zero();
        for k in 1..=HORIZON {
            let cur = s.partial(k)?;
            if cur <= prev || cur >= Rational::one() {
                bad.push(format!("{} partial sum at k={k}", s.enumerator().label()));
                break;
            }
            prev = cur;
        }
        count += 1;
    }

    let pairs = [
        Delta2Cert::new(fixtures::geo_shifted(), fixtures::geo_quarter()),
        Delta2Cert::new(specker_id.to_sigma1(), specker_tm.to_sigma1()),
    ];
    for d in &pairs {
        for u in [q(1, 3), q(7, 2), q(1000, 1)] {
            let shifted = Delta2Cert::new(sigma1_shift(&d.a, &u), sigma1_shift(&d.b, &u));
            if let Some(k) = (0..=256).find(|k| delta2_anytime(&shifted, *k) != delta2_anytime(d, *k)) {
                bad.push(format!("shift {u} changes the estimate at k={k}"));
            }
            count += 1;
        }
    }
    Ok(Finding::new(bad.is_empty(), count, if bad.is_empty() { "all hold".into() } else { bad.join("; ") }))
}

fn moment_bound(_: &VerifyOptions) -> Result<Finding> {
    let mut worst: Option<(u64, Rational)> = None;
    let mut holds = true;
    for n in 1..=100u64 {
        let m = moment_enclosure(n, 30)?;
        let bound = log2_enclosure(&Rational::from(n + 2), 30)?.scale(&q(1, 2));
        let margin = m.lo() - bound.hi();
        holds &= margin.is_positive();
        if worst.as_ref().is_none_or(|(_, w)| &margin < w) {
            worst = Some((n, margin));
        }
    }
    let (n, w) = worst.expect("nonempty");
    Ok(Finding::new(holds, 100, format!("smallest margin {} at n={n}", dec(&w))))
}

fn golden_specker(opts: &VerifyOptions) -> Result<Finding> {
    let g: SpeckerGolden = golden::load(&opts.golden_dir, golden::SPECKER_FILE)?;
    let now = golden::compute_specker()?;
    let same = g == now;
    Ok(Finding::new(same, g.k, format!("k={} prefix identical: {same}", g.k)))
}

fn golden_gen_pdf(opts: &VerifyOptions) -> Result<Finding> {
    let g: GenPdfGolden = golden::load(&opts.golden_dir, golden::GEN_PDF_FILE)?;
    let now = golden::compute_gen_pdf()?;
    let same = g == now;
    let brackets = now.mass.contains(&Rational::one());
    Ok(Finding::new(same && brackets, 1, format!("identical: {same}; brackets 1: {brackets}")))
}

fn golden_oracle(opts: &VerifyOptions) -> Result<Finding> {
    let g: OracleGolden = golden::load(&opts.golden_dir, golden::ORACLE_FILE)?;
    let oracle = golden::oracle1_value()?;
    let est = golden::oracle1_estimates(g.k_max)?;
    let target = g.oracle.mid();
    let settles = golden::settling_index(&est, &target, &g.tolerance).is_some_and(|k0| k0 <= g.k0);
    let agrees = oracle.intersect(&g.oracle).is_some();
    let last = (est.last().expect("k_max >= 1") - &target).abs();
    Ok(Finding::new(
        settles && agrees && est == g.estimates,
        g.k_max,
        format!("k0={} holds: {settles}; final distance {}; oracle reproduced: {agrees}", g.k0, dec(&last)),
    ))
}
