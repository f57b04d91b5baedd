//! The five subcommands. Each validates its settings, calls the library, and
//! renders one document in the requested format.

use serde::Serialize;

use crate::capacity::{
    capacity_certificate_with, mc_estimate, snr, Channel, ChannelSummary, Coverage, Fading, Kernel, McEstimate,
    CAPACITY_TOL_BITS,
};
use crate::constructions::eval_g;
use crate::error::{Error, Result};
use crate::exact::{Interval, Rational};
use crate::fixtures;
use crate::hierarchy::{REEnumerator, SpeckerNumber};
use crate::quad::{Jet, QuadOptions};
use crate::verify::{run_suite, Suite, SuiteReport, VerifyOptions, DEFAULT_SEED};

use super::config::{Format, Settings};
use super::output::{csv_doc, emit, json_doc, EnumeratorId, Meta, Num, Range};
use super::{EXIT_OK, EXIT_VERIFICATION};

/// What a command leaves for the caller: an exit code and warnings for stderr.
#[derive(Debug)]
pub struct Outcome {
    pub exit: i32,
    pub warnings: Vec<String>,
}

pub fn dispatch(name: &str, s: Settings) -> Result<Outcome> {
    if let Some(n) = s.threads {
        if n == 0 {
            return Err(Error::Validation("--threads must be at least 1".into()));
        }
        // a second build in the same process keeps the first pool, which is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match name {
        "gen-pdf" => cmd_gen_pdf(&s),
        "capacity" => cmd_capacity(&s),
        "specker" => cmd_specker(&s),
        "quad" => cmd_quad(&s),
        "verify" => cmd_verify(&s),
        _ => Err(Error::Validation(format!("unknown command {name:?}"))),
    }
}

fn meta(command: &str, s: &Settings, enumerator: EnumeratorId) -> Meta {
    Meta::new(command, s.digest(), enumerator, !s.no_timestamp.unwrap_or(false))
}

/// The enumerator behind a run; runs without one record the committed dovetail table.
fn enumerator_id(pdfs: &[&Fading]) -> EnumeratorId {
    match pdfs.iter().find_map(|f| match f {
        Fading::Star(p) => Some(p.enumerator().clone()),
        _ => None,
    }) {
        Some(e) => EnumeratorId { label: e.label().into(), hash: e.content_hash() },
        None => {
            let e = REEnumerator::dovetail_tm();
            EnumeratorId { label: format!("{} (default backend, unused)", e.label()), hash: e.content_hash() }
        }
    }
}

fn quad_opts(s: &Settings) -> Result<(u32, QuadOptions)> {
    let bits = s.precision_bits.unwrap_or(CAPACITY_TOL_BITS as u32);
    if !(4..=60).contains(&bits) {
        return Err(Error::Validation(format!("precision bits must lie in 4..=60, got {bits}")));
    }
    Ok((bits, QuadOptions { tol: Rational::pow2(-(bits as i64)), budget: 1 << 16 }))
}

fn not_converged(bits: u32, what: &str, width: &Rational) -> Error {
    Error::PrecisionCap {
        requested_bits: bits,
        achievable_bits: (-width.floor_log2().unwrap_or(0)).max(0) as u32,
        reason: format!("quadrature budget exhausted for {what}"),
    }
}

fn coverage_warning(which: &str, f: &Fading, c: &Coverage) -> Option<String> {
    c.under_covered().then(|| {
        format!(
            "{which} = {}: radius {} cuts through the support; {} pieces fully covered; adjusted radius {}",
            f.label(),
            c.radius,
            c.covered,
            c.adjusted
        )
    })
}

fn finish(s: &Settings, text: String, warnings: Vec<String>) -> Result<Outcome> {
    emit(s.out.as_deref(), &text)?;
    Ok(Outcome { exit: EXIT_OK, warnings })
}

#[derive(Serialize)]
struct PdfReport {
    label: String,
    descriptor: crate::constructions::PdfDescriptor,
    /// Full-line mass, widened by the tail bound; contains 1.
    mass: Range,
    tail_bound: Num,
    /// Every retained piece lies in `|a| <= support_radius`.
    support_radius: Num,
    log_moment_bound: Num,
    #[serde(skip_serializing_if = "Option::is_none")]
    capacity: Option<CapacityTerm>,
}

#[derive(Serialize)]
struct CapacityTerm {
    snr: Num,
    enclosure: Range,
}

fn full_mass(f: &Fading, opts: &QuadOptions) -> Result<Interval> {
    let tail = f.tail_mass();
    let m = match f {
        Fading::Bump { .. } => Interval::point(Rational::one()),
        Fading::Train(p) => p.truncated_mass(),
        Fading::Star(p) => {
            let one = |_: &Jet| Ok(Jet::constant(Interval::point(Rational::one())));
            p.integrate_against(&one, opts)?.enclosure.scale(&Rational::from(2i64))
        }
    };
    Interval::new(m.lo().clone(), m.hi() + &tail)
}

fn support_radius(f: &Fading) -> Rational {
    let four = Rational::from(4i64);
    match f {
        Fading::Bump { shift } => shift + &four,
        Fading::Train(p) => p.alpha_star(p.terms()).hi() + &four,
        Fading::Star(p) => Rational::from(p.truncation() + 1),
    }
}

fn density_at(f: &Fading, a: &Rational) -> Result<Interval> {
    match f {
        Fading::Bump { shift } => Ok(Interval::point(eval_g(&(&a.abs() - shift)))),
        Fading::Train(p) => Ok(p.eval(a, p.terms())),
        Fading::Star(p) => p.eval(a),
    }
}

pub fn cmd_gen_pdf(s: &Settings) -> Result<Outcome> {
    s.restrict("gen-pdf", &["pdf", "power", "sigma_sq"])?;
    let spec = s.pdf.clone().unwrap_or_else(|| "train:geo-1:16".into());
    let f = fixtures::pdf(&spec, s.precision_bits)?;
    let (_, opts) = quad_opts(&Settings { precision_bits: None, ..s.clone() })?;
    let capacity = match (&s.power, &s.sigma_sq) {
        (None, None) => None,
        (p, v) => {
            let one = Rational::one();
            let c = snr(p.as_ref().unwrap_or(&one), v.as_ref().unwrap_or(&one))?;
            let r = f.integrate(&Kernel::Capacity { snr: c.clone() }, None, &opts)?;
            Some(CapacityTerm { snr: Num::from(&c), enclosure: Range::from(&r.enclosure) })
        }
    };
    let support = support_radius(&f);
    let m = meta("gen-pdf", s, enumerator_id(&[&f]));
    let text = match s.format.unwrap_or(Format::Json) {
        Format::Json => {
            let report = PdfReport {
                label: f.label(),
                descriptor: f.descriptor(),
                mass: Range::from(&full_mass(&f, &opts)?),
                tail_bound: Num::from(&f.tail_mass()),
                support_radius: Num::from(&support),
                log_moment_bound: Num::from(&f.log_moment_bound()),
                capacity,
            };
            json_doc(&m, &report)
        }
        Format::Csv => {
            // density on a 1/4 grid over the support, for plotting
            let steps = (support.shl(2)).ceil().try_into().unwrap_or(0u64);
            let mut rows = Vec::new();
            for i in 0..=steps {
                let a = Rational::from(i).shl(-2);
                let v = density_at(&f, &a)?;
                let r = Range::from(&v);
                rows.push(vec![a.to_string(), r.lo.to_string(), r.hi.to_string(), r.lo_decimal, r.hi_decimal]);
            }
            let notes = vec![format!("pdf: {}", f.label()), format!("support_radius: {support}")];
            csv_doc(&m, &notes, &["a", "f_lo", "f_hi", "f_lo_decimal", "f_hi_decimal"], &rows)
        }
    };
    finish(s, text, Vec::new())
}

#[derive(Serialize)]
struct TraceRow {
    k: u64,
    a: Num,
    b: Num,
    estimate: Num,
}

#[derive(Serialize)]
struct CapacityReport {
    channel: ChannelSummary,
    /// Content hashes of the enumerators behind `f1`, `f2` (empty for bump trains).
    f1_hash: String,
    f2_hash: String,
    a_bound: u64,
    b_bound: u64,
    tolerance_bits: u32,
    radius: u64,
    trace: Vec<TraceRow>,
    final_estimate: Num,
    coverage: [Coverage; 2],
    warnings: Vec<String>,
}

fn build_channel(s: &Settings) -> Result<Channel> {
    if let Some(name) = &s.channel {
        let custom =
            s.f1.is_some() || s.f2.is_some() || s.power.is_some() || s.sigma1_sq.is_some() || s.sigma2_sq.is_some();
        if custom {
            return Err(Error::Validation(format!(
                "channel {name:?} fixes f1, f2, power and noise; drop those fields"
            )));
        }
        return fixtures::channel(name);
    }
    let need = |v: &Option<String>, n: &str| {
        v.clone().ok_or_else(|| Error::Validation(format!("give --channel, or both --f1 and --f2 (missing {n})")))
    };
    let one = Rational::one();
    Channel::new(
        fixtures::pdf(&need(&s.f1, "f1")?, None)?,
        fixtures::pdf(&need(&s.f2, "f2")?, None)?,
        s.sigma1_sq.clone().unwrap_or_else(|| one.clone()),
        s.sigma2_sq.clone().unwrap_or_else(|| one.clone()),
        s.power.clone().unwrap_or(one),
    )
}

pub fn cmd_capacity(s: &Settings) -> Result<Outcome> {
    s.restrict("capacity", &["channel", "f1", "f2", "power", "sigma1_sq", "sigma2_sq", "radius"])?;
    let radius = s.radius.unwrap_or(32);
    if radius == 0 {
        return Err(Error::Validation("radius must be at least 1".into()));
    }
    let (bits, opts) = quad_opts(s)?;
    let ch = build_channel(s)?;
    let r = Rational::from(radius);
    for (f, k, which) in [(&ch.f1, ch.bob_kernel(), "f1"), (&ch.f2, ch.eve_kernel(), "f2")] {
        let t = f.integrate(&k, Some(&r), &opts)?;
        if !t.converged {
            return Err(not_converged(bits, which, &t.enclosure.width()));
        }
    }
    let coverage = [ch.f1.coverage(&r), ch.f2.coverage(&r)];
    let warnings: Vec<String> = [("f1", &ch.f1), ("f2", &ch.f2)]
        .iter()
        .zip(&coverage)
        .filter_map(|((w, f), c)| coverage_warning(w, f, c))
        .collect();
    let cert = capacity_certificate_with(&ch, &opts);
    let trace: Vec<(u64, Rational, Rational)> =
        (1..=radius).map(|k| (k, cert.a_seq.term(k), cert.b_seq.term(k))).collect();
    let m = meta("capacity", s, enumerator_id(&[&ch.f1, &ch.f2]));
    let text = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let rows: Vec<Vec<String>> = trace
                .iter()
                .map(|(k, a, b)| {
                    let e = a - b;
                    vec![
                        k.to_string(),
                        a.to_string(),
                        b.to_string(),
                        e.to_string(),
                        Num::from(a).decimal,
                        Num::from(b).decimal,
                        Num::from(&e).decimal,
                    ]
                })
                .collect();
            let mut notes = vec![
                format!("channel: f1={} f2={}", ch.f1.label(), ch.f2.label()),
                format!("power: {} sigma1_sq: {} sigma2_sq: {}", ch.power, ch.sigma1_sq, ch.sigma2_sq),
                format!("tolerance_bits: {bits}"),
            ];
            notes.extend(warnings.iter().map(|w| format!("warning: {w}")));
            csv_doc(
                &m,
                &notes,
                &["k", "a_k", "b_k", "estimate", "a_k_decimal", "b_k_decimal", "estimate_decimal"],
                &rows,
            )
        }
        Format::Json => {
            let (_, a, b) = trace.last().expect("radius >= 1");
            let report = CapacityReport {
                channel: ch.summary(),
                f1_hash: ch.f1.content_hash(),
                f2_hash: ch.f2.content_hash(),
                a_bound: cert.a_seq.bound(),
                b_bound: cert.b_seq.bound(),
                tolerance_bits: bits,
                radius,
                final_estimate: Num::from(&(a - b)),
                trace: trace
                    .iter()
                    .map(|(k, a, b)| TraceRow { k: *k, a: a.into(), b: b.into(), estimate: (&(a - b)).into() })
                    .collect(),
                coverage,
                warnings: warnings.clone(),
            };
            json_doc(&m, &report)
        }
    };
    finish(s, text, warnings)
}

#[derive(Serialize)]
struct SpeckerRow {
    l: u64,
    phi: u64,
    partial: Num,
}

#[derive(Serialize)]
struct SpeckerReport {
    k: u64,
    rows: Vec<SpeckerRow>,
    /// `1 - partial(k)`, a bound on the remaining sum.
    residual_bound: Num,
}

pub fn cmd_specker(s: &Settings) -> Result<Outcome> {
    s.restrict("specker", &["enumerator", "k"])?;
    let k = s.k.unwrap_or(10);
    if k == 0 {
        return Err(Error::Validation("k must be at least 1".into()));
    }
    let e = fixtures::enumerator(s.enumerator.as_deref().unwrap_or("dovetail"))?;
    let x = SpeckerNumber::new(e.clone());
    let mut rows = Vec::new();
    for l in 1..=k {
        rows.push(SpeckerRow { l, phi: e.phi(l)?, partial: Num::from(&x.partial(l)?) });
    }
    let m = meta("specker", s, EnumeratorId { label: e.label().into(), hash: e.content_hash() });
    let text = match s.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![r.l.to_string(), r.phi.to_string(), r.partial.exact.to_string(), r.partial.decimal.clone()]
                })
                .collect();
            csv_doc(&m, &[], &["l", "phi", "partial", "partial_decimal"], &body)
        }
        Format::Json => json_doc(&m, &SpeckerReport { k, residual_bound: Num::from(&x.residual_bound(k)?), rows }),
    };
    finish(s, text, Vec::new())
}

#[derive(Serialize)]
struct QuadReport {
    pdf: String,
    kernel: Kernel,
    integrand: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<u64>,
    tolerance_bits: u32,
    enclosure: Range,
    width: Num,
    subdivisions: usize,
    covered: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<McEstimate>,
    warnings: Vec<String>,
}

fn kernel(name: &str, c: Rational) -> Result<Kernel> {
    match name {
        "capacity" => Ok(Kernel::Capacity { snr: c }),
        "excess" => Ok(Kernel::Excess { snr: c }),
        "gap" => Ok(Kernel::Gap { snr: c }),
        _ => Err(Error::Validation(format!("unknown kernel {name:?}; expected capacity, excess or gap"))),
    }
}

pub fn cmd_quad(s: &Settings) -> Result<Outcome> {
    s.restrict("quad", &["pdf", "kernel", "power", "sigma_sq", "radius", "mc_samples"])?;
    let (bits, opts) = quad_opts(s)?;
    let f = fixtures::pdf(s.pdf.as_deref().unwrap_or("bump:0"), None)?;
    let one = Rational::one();
    let power = s.power.clone().unwrap_or_else(|| one.clone());
    let sigma_sq = s.sigma_sq.clone().unwrap_or_else(|| one.clone());
    let k = kernel(s.kernel.as_deref().unwrap_or("capacity"), snr(&power, &sigma_sq)?)?;
    let radius = s.radius.map(Rational::from);
    let r = f.integrate(&k, radius.as_ref(), &opts)?;
    if !r.converged {
        return Err(not_converged(bits, &f.label(), &r.enclosure.width()));
    }
    let warnings: Vec<String> = radius.iter().filter_map(|rad| coverage_warning("pdf", &f, &f.coverage(rad))).collect();
    let monte_carlo = match s.mc_samples {
        None => None,
        Some(n) => {
            if !matches!(k, Kernel::Capacity { .. }) || radius.is_some() {
                return Err(Error::Validation("Monte-Carlo checks the full-line capacity kernel only".into()));
            }
            Some(mc_estimate(&f, &power, &sigma_sq, n, s.seed.unwrap_or(DEFAULT_SEED))?)
        }
    };
    let m = meta("quad", s, enumerator_id(&[&f]));
    let enclosure = Range::from(&r.enclosure);
    let text = match s.format.unwrap_or(Format::Json) {
        Format::Json => json_doc(
            &m,
            &QuadReport {
                pdf: f.label(),
                integrand: k.to_string(),
                kernel: k,
                radius: s.radius,
                tolerance_bits: bits,
                width: Num::from(&r.enclosure.width()),
                enclosure,
                subdivisions: r.subdivisions,
                covered: r.covered,
                monte_carlo,
                warnings: warnings.clone(),
            },
        ),
        Format::Csv => {
            let mut row = vec![
                f.label(),
                k.to_string(),
                enclosure.lo.to_string(),
                enclosure.hi.to_string(),
                enclosure.lo_decimal,
                enclosure.hi_decimal,
            ];
            let mut header = vec!["pdf", "integrand", "lo", "hi", "lo_decimal", "hi_decimal"];
            if let Some(mc) = &monte_carlo {
                row.extend([format!("{:.12}", mc.mean), format!("{:.3e}", mc.std_err)]);
                header.extend(["mc_mean", "mc_std_err"]);
            }
            let notes: Vec<String> = warnings.iter().map(|w| format!("warning: {w}")).collect();
            csv_doc(&m, &notes, &header, &[row])
        }
    };
    finish(s, text, warnings)
}

pub fn cmd_verify(s: &Settings) -> Result<Outcome> {
    s.restrict("verify", &["only", "golden_dir"])?;
    let only = s.only.iter().flatten().map(|x| x.parse::<Suite>()).collect::<Result<Vec<_>>>()?;
    let opts = VerifyOptions {
        golden_dir: s.golden_dir.clone().unwrap_or_else(crate::golden::default_dir),
        only,
        seed: s.seed.unwrap_or(DEFAULT_SEED),
    };
    let structured = s.format.is_some();
    let report: SuiteReport = run_suite(&opts, |r| {
        if structured {
            eprintln!("{r}");
        } else {
            println!("{r}");
        }
    });
    let exit = if report.all_passed() { EXIT_OK } else { EXIT_VERIFICATION };
    let summary = format!("verify: {} passed, {} failed", report.passed, report.failed);
    let e = REEnumerator::dovetail_tm();
    let m = meta("verify", s, EnumeratorId { label: e.label().into(), hash: e.content_hash() });
    match s.format {
        None => {
            let text = format!("{summary}\n");
            emit(s.out.as_deref(), &text)?;
        }
        Some(Format::Json) => emit(s.out.as_deref(), &json_doc(&m, &report))?,
        Some(Format::Csv) => {
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.id.clone(),
                        c.suite.to_string(),
                        c.passed.to_string(),
                        c.count.to_string(),
                        c.elapsed_ms.to_string(),
                        c.limit_ms.to_string(),
                        format!("\"{}\"", c.detail.replace('"', "'")),
                    ]
                })
                .collect();
            let text = csv_doc(
                &m,
                std::slice::from_ref(&summary),
                &["id", "suite", "passed", "count", "elapsed_ms", "limit_ms", "detail"],
                &rows,
            );
            emit(s.out.as_deref(), &text)?;
        }
    }
    if structured {
        eprintln!("{summary}");
    }
    Ok(Outcome { exit, warnings: Vec::new() })
}
