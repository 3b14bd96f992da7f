//! Finite-statistics simulation of a Bell experiment: fixed-size multinomial
//! sampling per setting tuple, plug-in correlator estimation with
//! one-standard-deviation error propagation, GHZ fidelity from Pauli basis
//! measurements, and generalized-GHZ curves.

use std::collections::BTreeMap;
use std::io::Read;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::bellfunc::{bounds, evaluate_state, BellFunctional};
use crate::error::{invalid, Error, Result};
use crate::quantum::{generalized_ghz, standard_settings, CorrelationTable};

/// Events recorded in the four-photon run.
pub const EXPERIMENT_EVENTS: u64 = 33252;

/// How events are distributed over setting tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// Equal split, remainder to the earliest tuples. An assumption: the
    /// per-setting counts of the experiment are not reported.
    EqualAssumed,
    Custom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub settings: Vec<Vec<usize>>,
    pub events_per_setting: Vec<u64>,
    pub master_seed: u64,
    pub allocation: Allocation,
}

impl ShotPlan {
    pub fn new(settings: Vec<Vec<usize>>, events_per_setting: Vec<u64>, master_seed: u64) -> Result<Self> {
        if settings.len() != events_per_setting.len() {
            return Err(Error::DimensionMismatch { expected: settings.len(), got: events_per_setting.len() });
        }
        if settings.is_empty() {
            return Err(invalid("a shot plan needs at least one setting tuple"));
        }
        if events_per_setting.contains(&0) {
            return Err(invalid("every setting tuple needs at least one event"));
        }
        Ok(Self { settings, events_per_setting, master_seed, allocation: Allocation::Custom })
    }

    /// Splits `total` events equally over every tuple of `shape`.
    pub fn equal(shape: &[usize], total: u64, master_seed: u64) -> Result<Self> {
        let count: usize = shape.iter().product();
        if count == 0 || shape.is_empty() {
            return Err(invalid("settings shape must be nonempty with positive entries"));
        }
        if total < count as u64 {
            return Err(invalid(format!("{total} events cannot cover {count} setting tuples")));
        }
        let settings: Vec<Vec<usize>> = (0..count).map(|t| CorrelationTable::decode_settings(shape, t)).collect();
        let (base, rem) = (total / count as u64, total % count as u64);
        let events = (0..count as u64).map(|t| base + u64::from(t < rem)).collect();
        let mut plan = Self::new(settings, events, master_seed)?;
        plan.allocation = Allocation::EqualAssumed;
        Ok(plan)
    }

    /// 33252 events over the 16 tuples of the four-party functional.
    pub fn experiment_n4(master_seed: u64) -> Self {
        Self::equal(&[2; 4], EXPERIMENT_EVENTS, master_seed).expect("static plan")
    }

    /// The three-photon data are heralded by the fourth detector, so the
    /// same events fall on the 8 tuples of the three-party functional.
    pub fn experiment_n3(master_seed: u64) -> Self {
        Self::equal(&[2; 3], EXPERIMENT_EVENTS, master_seed).expect("static plan")
    }

    pub fn total_events(&self) -> u64 {
        self.events_per_setting.iter().sum()
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }
}

/// Outcome counts per setting tuple of a plan. Sampled records hold
/// integers; [`SampledRecord::expected`] holds exact expected counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledRecord {
    pub settings: Vec<Vec<usize>>,
    pub counts: Vec<Vec<f64>>,
}

impl SampledRecord {
    pub fn events(&self, k: usize) -> f64 {
        self.counts[k].iter().sum()
    }

    /// The infinite-statistics record: counts equal to `events · p(a|x)`.
    pub fn expected(table: &CorrelationTable, plan: &ShotPlan) -> Result<Self> {
        let counts = plan
            .settings
            .iter()
            .zip(&plan.events_per_setting)
            .map(|(x, &e)| Ok(table.distribution(x).map_err(|_| Error::MissingSetting(x.clone()))?.iter().map(|p| p * e as f64).collect()))
            .collect::<Result<_>>()?;
        Ok(Self { settings: plan.settings.clone(), counts })
    }
}

fn replication_rng(master_seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication);
    rng
}

/// Draws one record from `table` under `plan`, using the stream for
/// replication 0.
pub fn sample_counts(table: &CorrelationTable, plan: &ShotPlan) -> Result<SampledRecord> {
    sample_replication(table, plan, 0)
}

/// Draws the record of replication `replication`; the stream depends only
/// on `(plan.master_seed, replication)`.
pub fn sample_replication(table: &CorrelationTable, plan: &ShotPlan, replication: u64) -> Result<SampledRecord> {
    let mut rng = replication_rng(plan.master_seed, replication);
    let mut counts = Vec::with_capacity(plan.settings.len());
    for (x, &events) in plan.settings.iter().zip(&plan.events_per_setting) {
        let dist = table.distribution(x).map_err(|_| Error::MissingSetting(x.clone()))?;
        counts.push(multinomial(&mut rng, events, dist)?);
    }
    Ok(SampledRecord { settings: plan.settings.clone(), counts })
}

/// Sequential-binomial multinomial draw.
fn multinomial(rng: &mut ChaCha8Rng, events: u64, probs: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; probs.len()];
    let mut left = events;
    let mut mass = 1.0f64;
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == probs.len() {
            out[k] = left as f64;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(left, q).map_err(|e| invalid(format!("binomial({left}, {q}): {e}")))?.sample(rng);
        out[k] = draw as f64;
        left -= draw;
        mass -= p;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermEstimate {
    pub coeff: f64,
    pub settings: Vec<Option<usize>>,
    pub value: f64,
    pub std_error: f64,
    pub events: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub value: f64,
    pub std_error: f64,
    pub terms: Vec<TermEstimate>,
}

/// Plug-in estimate of `functional` from `record`. Each correlator pools the
/// counts of every recorded tuple compatible with its settings; its variance
/// is `(1 - Ê²)/events` and terms are treated as independent.
pub fn estimate_functional(record: &SampledRecord, functional: &BellFunctional) -> Result<EstimateResult> {
    let n = functional.n_parties;
    if record.settings.iter().any(|x| x.len() != n) {
        return Err(invalid(format!("record tuples do not have {n} parties")));
    }
    let mut terms = Vec::with_capacity(functional.terms.len());
    let (mut value, mut var) = (0.0, 0.0);
    for term in &functional.terms {
        let mask = term.present().fold(0usize, |m, (p, _)| m | 1 << (n - 1 - p));
        let (mut events, mut signed) = (0.0, 0.0);
        for (x, counts) in record.settings.iter().zip(&record.counts) {
            if term.present().all(|(p, s)| x[p] == s) {
                for (a, &c) in counts.iter().enumerate() {
                    let parity = (a & mask).count_ones() % 2;
                    signed += if parity == 0 { c } else { -c };
                }
                events += counts.iter().sum::<f64>();
            }
        }
        if events <= 0.0 {
            let missing = term.settings.iter().map(|s| s.unwrap_or(usize::MAX)).collect();
            return Err(Error::ZeroCount(missing));
        }
        let e = signed / events;
        let v = (1.0 - e * e).max(0.0) / events;
        value += term.coeff * e;
        var += term.coeff * term.coeff * v;
        terms.push(TermEstimate { coeff: term.coeff, settings: term.settings.clone(), value: e, std_error: v.sqrt(), events });
    }
    Ok(EstimateResult { value, std_error: var.sqrt(), terms })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n: usize,
    pub visibility: f64,
    pub events: u64,
    pub replications: usize,
    pub master_seed: u64,
    pub allocation: Allocation,
    /// Estimate of the first replication.
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub sigma_violation: f64,
    pub mean_estimate: f64,
    pub mean_std_error: f64,
    /// Sample standard deviation of the estimates across replications.
    pub empirical_sd: f64,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
}

/// Runs `replications` independent sample-and-estimate rounds on up to
/// `threads` threads. Results do not depend on the thread count.
pub fn simulate(
    table: &CorrelationTable,
    plan: &ShotPlan,
    functional: &BellFunctional,
    replications: usize,
    threads: usize,
) -> Result<Vec<EstimateResult>> {
    if replications == 0 {
        return Err(invalid("replications must be positive"));
    }
    let threads = threads.clamp(1, replications);
    let run = |r: usize| sample_replication(table, plan, r as u64).and_then(|rec| estimate_functional(&rec, functional));
    if threads == 1 {
        return (0..replications).map(run).collect();
    }
    let mut slots: Vec<Option<Result<EstimateResult>>> = (0..replications).map(|_| None).collect();
    std::thread::scope(|scope| {
        for (w, chunk) in slots.chunks_mut(replications.div_ceil(threads)).enumerate() {
            let start = w * replications.div_ceil(threads);
            let run = &run;
            scope.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(run(start + i));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.expect("every replication ran")).collect()
}

/// Samples the white-noise GHZ state under `plan` and summarizes the
/// replications against the LOSR bound.
pub fn simulate_ghz(
    n: usize,
    visibility: f64,
    plan: &ShotPlan,
    replications: usize,
    threads: usize,
) -> Result<SimulationReport> {
    let functional = crate::bellfunc::s_functional(n)?;
    let state = crate::quantum::ghz(n)?.with_visibility(visibility)?;
    let table = crate::quantum::correlation_table(&state, &standard_settings(n)?)?;
    let results = simulate(&table, plan, &functional, replications, threads)?;
    let bound = bounds(n)?.losr;
    let estimates: Vec<f64> = results.iter().map(|r| r.value).collect();
    let std_errors: Vec<f64> = results.iter().map(|r| r.std_error).collect();
    let k = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / k;
    let empirical_sd = if estimates.len() > 1 {
        (estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
    } else {
        0.0
    };
    let first = &results[0];
    Ok(SimulationReport {
        n,
        visibility,
        events: plan.total_events(),
        replications,
        master_seed: plan.master_seed,
        allocation: plan.allocation,
        estimate: first.value,
        std_error: first.std_error,
        bound,
        sigma_violation: (first.value - bound) / first.std_error,
        mean_estimate: mean,
        mean_std_error: std_errors.iter().sum::<f64>() / k,
        empirical_sd,
        estimates,
        std_errors,
    })
}

/// One measured expectation value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisValue {
    pub basis_label: String,
    pub value: f64,
    pub std_error: f64,
}

/// Reads `basis_label,value,std_error` rows. Lines starting with `#` are
/// comments; a header row is optional.
pub fn read_expectations_csv<R: Read>(reader: R) -> Result<Vec<BasisValue>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse { line: e.position().map_or(0, |p| p.line() as usize), msg: e.to_string() })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        if rec.len() != 3 {
            return Err(Error::Parse { line, msg: format!("expected 3 fields, found {}", rec.len()) });
        }
        if rec[0].eq_ignore_ascii_case("basis_label") {
            continue;
        }
        let num = |i: usize, what: &str| -> Result<f64> {
            rec[i].parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("{what} {:?}: {e}", &rec[i]) })
        };
        out.push(BasisValue { basis_label: rec[0].to_ascii_uppercase(), value: num(1, "value")?, std_error: num(2, "std_error")? });
    }
    Ok(out)
}

pub fn write_expectations_csv<W: std::io::Write>(values: &[BasisValue], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["basis_label", "value", "std_error"]).map_err(std::io::Error::from)?;
    for v in values {
        wtr.write_record([v.basis_label.clone(), format!("{:.16e}", v.value), format!("{:.16e}", v.std_error)])
            .map_err(std::io::Error::from)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Pauli-basis weights of `|GHZ_n><GHZ_n|` as used by the fidelity
/// estimators; the population term has weight 1/2.
pub fn fidelity_weights(n: usize) -> Result<Vec<(&'static str, f64)>> {
    match n {
        3 => Ok(vec![("POP", 0.5), ("XXX", 0.125), ("YXY", -0.125), ("XYY", -0.125), ("YYX", -0.125)]),
        4 => Ok(vec![
            ("POP", 0.5),
            ("XXXX", 0.0625),
            ("XXYY", -0.0625),
            ("XYXY", -0.0625),
            ("XYYX", -0.0625),
            ("YXXY", -0.0625),
            ("YXYX", -0.0625),
            ("YYXX", -0.0625),
            ("YYYY", 0.0625),
        ]),
        _ => Err(invalid(format!("fidelity estimators exist for n = 3 and 4, got {n}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub n: usize,
    pub fidelity: f64,
    pub std_error: f64,
    pub visibility: f64,
    pub visibility_std_error: f64,
}

fn fidelity(n: usize, values: &[BasisValue]) -> Result<FidelityEstimate> {
    let weights = fidelity_weights(n)?;
    let by_label: BTreeMap<&str, &BasisValue> = values.iter().map(|v| (v.basis_label.as_str(), v)).collect();
    if by_label.len() != values.len() {
        return Err(invalid("duplicate basis labels"));
    }
    let (mut f, mut var) = (0.0, 0.0);
    for (label, w) in &weights {
        let v = by_label.get(label).ok_or_else(|| invalid(format!("missing basis value {label}")))?;
        if !(-1.0..=1.0).contains(&v.value) || !(v.std_error >= 0.0) {
            return Err(invalid(format!("{label}: value {} or std_error {} out of range", v.value, v.std_error)));
        }
        f += w * v.value;
        var += (w * v.std_error).powi(2);
    }
    if let Some(extra) = by_label.keys().find(|l| !weights.iter().any(|(w, _)| w == *l)) {
        return Err(invalid(format!("unexpected basis label {extra} for n = {n}")));
    }
    let scale = (1u64 << n) as f64 / ((1u64 << n) - 1) as f64;
    Ok(FidelityEstimate {
        n,
        fidelity: f,
        std_error: var.sqrt(),
        visibility: visibility_from_fidelity(n, f)?,
        visibility_std_error: scale * var.sqrt(),
    })
}

/// Fidelity with `|GHZ_4>` from the population and eight X/Y correlators.
pub fn fidelity_ghz4(values: &[BasisValue]) -> Result<FidelityEstimate> {
    fidelity(4, values)
}

/// Fidelity with `|GHZ_3>` from the population and four X/Y correlators.
pub fn fidelity_ghz3(values: &[BasisValue]) -> Result<FidelityEstimate> {
    fidelity(3, values)
}

/// `η = (2^n F - 1)/(2^n - 1)`, the inverse of `F = η + (1-η)/2^n`.
pub fn visibility_from_fidelity(n: usize, f: f64) -> Result<f64> {
    if n == 0 || n > 62 {
        return Err(invalid(format!("unsupported party count {n}")));
    }
    let d = (1u64 << n) as f64;
    if !(f >= 1.0 / d - 1e-15 && f <= 1.0 + 1e-12) {
        return Err(invalid(format!("fidelity {f} outside [2^-{n}, 1]")));
    }
    Ok((d * f - 1.0) / (d - 1.0))
}

pub fn fidelity_from_visibility(n: usize, visibility: f64) -> f64 {
    let d = (1u64 << n) as f64;
    visibility + (1.0 - visibility) / d
}

/// Basis values of the white-noise GHZ state computed by the quantum engine.
pub fn engine_expectations(n: usize, visibility: f64) -> Result<Vec<BasisValue>> {
    use crate::quantum::{expectation, ghz, Observable};
    let state = ghz(n)?.with_visibility(visibility)?;
    let mut out = Vec::new();
    for (label, _) in fidelity_weights(n)? {
        let value = if label == "POP" {
            // P(0...0) + P(1...1) of the noisy state
            let amps = state.amplitudes();
            let d = state.dim();
            let pure = amps[0].norm_sqr() + amps[d - 1].norm_sqr();
            visibility * pure + (1.0 - visibility) * 2.0 / d as f64
        } else {
            let ops: Vec<Option<Observable>> =
                label.chars().map(|c| Some(if c == 'X' { Observable::X } else { Observable::Y })).collect();
            expectation(&state, &ops)?
        };
        out.push(BasisValue { basis_label: label.to_string(), value: value.clamp(-1.0, 1.0), std_error: 0.0 });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub xi: f64,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_noisy")]
    pub s_noisy: f64,
}

/// `S_n` of the generalized GHZ state with the standard settings, ideal and
/// at `visibility`, for every ξ in `grid`.
pub fn xi_curve(n: usize, grid: &[f64], visibility: f64) -> Result<Vec<CurvePoint>> {
    let functional = crate::bellfunc::s_functional(n)?;
    let scenario = standard_settings(n)?;
    grid.iter()
        .map(|&xi| {
            let state = generalized_ghz(n, xi)?;
            let s = evaluate_state(&functional, &state, &scenario)?;
            let s_noisy = evaluate_state(&functional, &state.with_visibility(visibility)?, &scenario)?;
            Ok(CurvePoint { xi, s, s_noisy })
        })
        .collect()
}

pub fn write_curve_csv<W: std::io::Write>(points: &[CurvePoint], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["xi", "S", "S_noisy"]).map_err(std::io::Error::from)?;
    for p in points {
        wtr.write_record([format!("{:.16e}", p.xi), format!("{:.16e}", p.s), format!("{:.16e}", p.s_noisy)])
            .map_err(std::io::Error::from)?;
    }
    wtr.flush()?;
    Ok(())
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(lo < hi) {
        return Err(invalid(format!("grid needs n >= 2 and lo < hi, got n={n}, [{lo}, {hi}]")));
    }
    Ok((0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellfunc::{evaluate, s_functional};
    use crate::quantum::{correlation_table, ghz};

    fn ghz_table(n: usize, v: f64) -> CorrelationTable {
        correlation_table(&ghz(n).unwrap().with_visibility(v).unwrap(), &standard_settings(n).unwrap()).unwrap()
    }

    #[test]
    fn experiment_plans_allocate_all_events() {
        let p = ShotPlan::experiment_n4(1);
        assert_eq!(p.settings.len(), 16);
        assert_eq!(p.total_events(), 33252);
        assert_eq!(p.events_per_setting[0], 2079);
        assert_eq!(p.events_per_setting[4], 2078);
        assert_eq!(ShotPlan::experiment_n3(1).settings.len(), 8);
        assert_eq!(p.allocation, Allocation::EqualAssumed);
    }

    #[test]
    fn deterministic_table_puts_all_counts_on_one_outcome() {
        let t = CorrelationTable::from_fn(vec![2, 2], |_, a| if a == 2 { 1.0 } else { 0.0 }).unwrap();
        let rec = sample_counts(&t, &ShotPlan::equal(&[2, 2], 400, 3).unwrap()).unwrap();
        for c in &rec.counts {
            assert_eq!(c, &vec![0.0, 0.0, 100.0, 0.0]);
        }
    }

    #[test]
    fn sampling_is_seeded() {
        let t = ghz_table(3, 0.9);
        let plan = ShotPlan::equal(&[2; 3], 800, 42).unwrap();
        assert_eq!(sample_counts(&t, &plan).unwrap(), sample_counts(&t, &plan).unwrap());
        assert_ne!(sample_counts(&t, &plan).unwrap(), sample_counts(&t, &plan.clone().with_seed(43)).unwrap());
    }

    #[test]
    fn frequencies_converge() {
        let t = ghz_table(3, 0.8);
        let rec = sample_counts(&t, &ShotPlan::equal(&[2; 3], 8_000_000, 5).unwrap()).unwrap();
        for (x, c) in rec.settings.iter().zip(&rec.counts) {
            let p = t.distribution(x).unwrap();
            let total: f64 = c.iter().sum();
            for (a, &k) in c.iter().enumerate() {
                assert!((k / total - p[a]).abs() < 5e-3);
            }
        }
    }

    #[test]
    fn expected_counts_reproduce_evaluate() {
        for n in [3, 4] {
            let t = ghz_table(n, 0.93);
            let f = s_functional(n).unwrap();
            let rec = SampledRecord::expected(&t, &ShotPlan::equal(&vec![2; n], 1000, 0).unwrap()).unwrap();
            let est = estimate_functional(&rec, &f).unwrap();
            assert!((est.value - evaluate(&f, &t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_settings_are_errors() {
        let f = s_functional(3).unwrap();
        let rec = SampledRecord { settings: vec![vec![0, 0, 0]], counts: vec![vec![1.0; 8]] };
        assert!(matches!(estimate_functional(&rec, &f), Err(Error::ZeroCount(_))));
        let t = CorrelationTable::uniform(vec![1, 1, 1]).unwrap();
        let plan = ShotPlan::experiment_n3(0);
        assert!(matches!(sample_counts(&t, &plan), Err(Error::MissingSetting(_))));
    }

    #[test]
    fn threads_do_not_change_results() {
        let t = ghz_table(3, 0.95);
        let f = s_functional(3).unwrap();
        let plan = ShotPlan::equal(&[2; 3], 2000, 9).unwrap();
        let a = simulate(&t, &plan, &f, 7, 1).unwrap();
        let b = simulate(&t, &plan, &f, 7, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ideal_fidelity_is_one() {
        for n in [3, 4] {
            let vals: Vec<BasisValue> = fidelity_weights(n)
                .unwrap()
                .into_iter()
                .map(|(l, w)| BasisValue { basis_label: l.into(), value: w.signum(), std_error: 0.0 })
                .collect();
            let f = fidelity(n, &vals).unwrap();
            assert!((f.fidelity - 1.0).abs() < 1e-15);
            assert!((f.visibility - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn engine_fidelity_matches_white_noise_formula() {
        for n in [3, 4] {
            for eta in [0.0, 0.3, 0.9723, 1.0] {
                let f = fidelity(n, &engine_expectations(n, eta).unwrap()).unwrap();
                assert!((f.fidelity - fidelity_from_visibility(n, eta)).abs() < 1e-12);
                assert!((visibility_from_fidelity(n, f.fidelity).unwrap() - eta).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn fidelity_rejects_bad_input() {
        let mut vals = engine_expectations(3, 1.0).unwrap();
        vals[1].value = 1.5;
        assert!(fidelity_ghz3(&vals).is_err());
        assert!(fidelity_ghz4(&engine_expectations(3, 1.0).unwrap()).is_err());
        assert!(visibility_from_fidelity(4, 0.01).is_err());
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "# comment\nbasis_label,value,std_error\nXXX,0.9,0.01\nYXY,abc,0.01\n";
        match read_expectations_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn curve_endpoints_and_midpoint() {
        let pts = xi_curve(4, &[-1.0, 0.5, 1.0], 1.0).unwrap();
        let edge = std::f64::consts::SQRT_2 + 4.0;
        assert!((pts[0].s - edge).abs() < 1e-12 && (pts[2].s - edge).abs() < 1e-12);
        assert!((pts[1].s - (std::f64::consts::SQRT_2 * (1.0 + 0.75f64.sqrt()) + 4.0)).abs() < 1e-12);
    }
}
