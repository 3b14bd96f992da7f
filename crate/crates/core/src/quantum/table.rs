use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Outcome distributions `P(a|x)` for every setting tuple `x`.
///
/// Setting tuples are indexed in mixed radix with party 0 most significant.
/// Outcome tuples are indexed with party 0 as the most significant bit and
/// bit value 0 meaning outcome `+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationTable {
    n_parties: usize,
    settings_shape: Vec<usize>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    n_parties: usize,
    settings_shape: Vec<usize>,
    distributions: BTreeMap<String, Vec<f64>>,
}

const NORMALIZATION_TOL: f64 = 1e-12;

impl CorrelationTable {
    pub fn new(settings_shape: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        let n = settings_shape.len();
        if n == 0 || n > 16 {
            return Err(invalid(format!("table needs 1..=16 parties, got {n}")));
        }
        if settings_shape.contains(&0) {
            return Err(invalid("every party needs at least one setting"));
        }
        let tuples: usize = settings_shape.iter().product();
        let dim = 1usize << n;
        if probs.len() != tuples * dim {
            return Err(Error::DimensionMismatch { expected: tuples * dim, got: probs.len() });
        }
        for (t, dist) in probs.chunks(dim).enumerate() {
            if let Some(p) = dist.iter().find(|p| !(**p >= -NORMALIZATION_TOL) || !p.is_finite()) {
                return Err(invalid(format!("negative or non-finite probability {p} at setting tuple {t}")));
            }
            let sum: f64 = dist.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL * dim as f64 {
                return Err(invalid(format!(
                    "distribution for setting tuple {:?} sums to {sum}",
                    Self::decode_settings(&settings_shape, t)
                )));
            }
        }
        Ok(Self { n_parties: n, settings_shape, probs })
    }

    /// Builds a table from a function of `(settings, outcome index)`.
    pub fn from_fn(settings_shape: Vec<usize>, f: impl Fn(&[usize], usize) -> f64) -> Result<Self> {
        let n = settings_shape.len();
        let tuples: usize = settings_shape.iter().product();
        let dim = 1usize << n;
        let mut probs = Vec::with_capacity(tuples * dim);
        for t in 0..tuples {
            let x = Self::decode_settings(&settings_shape, t);
            probs.extend((0..dim).map(|a| f(&x, a)));
        }
        Self::new(settings_shape, probs)
    }

    /// Every outcome tuple equally likely.
    pub fn uniform(settings_shape: Vec<usize>) -> Result<Self> {
        let dim = (1usize << settings_shape.len()) as f64;
        Self::from_fn(settings_shape, |_, _| 1.0 / dim)
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn settings_shape(&self) -> &[usize] {
        &self.settings_shape
    }

    pub fn n_setting_tuples(&self) -> usize {
        self.settings_shape.iter().product()
    }

    pub fn n_outcomes(&self) -> usize {
        1 << self.n_parties
    }

    pub fn decode_settings(shape: &[usize], mut index: usize) -> Vec<usize> {
        let mut x = vec![0; shape.len()];
        for (p, &s) in shape.iter().enumerate().rev() {
            x[p] = index % s;
            index /= s;
        }
        x
    }

    pub fn settings_index(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.n_parties {
            return Err(Error::DimensionMismatch { expected: self.n_parties, got: x.len() });
        }
        let mut idx = 0;
        for (&s, &v) in self.settings_shape.iter().zip(x) {
            if v >= s {
                return Err(Error::MissingSetting(x.to_vec()));
            }
            idx = idx * s + v;
        }
        Ok(idx)
    }

    /// Distribution over outcome indices for setting tuple `x`.
    pub fn distribution(&self, x: &[usize]) -> Result<&[f64]> {
        let t = self.settings_index(x)?;
        let dim = self.n_outcomes();
        Ok(&self.probs[t * dim..(t + 1) * dim])
    }

    pub fn distribution_at(&self, tuple_index: usize) -> &[f64] {
        let dim = self.n_outcomes();
        &self.probs[tuple_index * dim..(tuple_index + 1) * dim]
    }

    /// Outcome `±1` of `party` in outcome tuple `a`.
    #[inline]
    pub fn outcome_sign(&self, a: usize, party: usize) -> f64 {
        if (a >> (self.n_parties - 1 - party)) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Mask (in outcome-index bit positions) of the parties in `present`.
    pub(crate) fn party_mask(&self, present: impl Iterator<Item = usize>) -> usize {
        present.fold(0, |m, p| m | 1 << (self.n_parties - 1 - p))
    }

    /// Correlator of the product of present parties' outcomes at one full
    /// setting tuple.
    pub fn correlator_at(&self, x: &[usize], mask: usize) -> Result<f64> {
        let dist = self.distribution(x)?;
        Ok(dist
            .iter()
            .enumerate()
            .map(|(a, p)| if (a & mask).count_ones().is_multiple_of(2) { *p } else { -*p })
            .sum())
    }

    /// `<∏_{i present} a_i>` with settings `Some(x_i)` for present parties and
    /// `None` for absent ones. Absent parties are marginalized; their
    /// settings are averaged over, which is exact for no-signaling tables.
    pub fn correlator(&self, settings: &[Option<usize>]) -> Result<f64> {
        if settings.len() != self.n_parties {
            return Err(Error::DimensionMismatch { expected: self.n_parties, got: settings.len() });
        }
        for (p, s) in settings.iter().enumerate() {
            if let Some(v) = s {
                if *v >= self.settings_shape[p] {
                    let x: Vec<usize> = settings.iter().map(|s| s.unwrap_or(0)).collect();
                    return Err(Error::MissingSetting(x));
                }
            }
        }
        let mask = self.party_mask((0..self.n_parties).filter(|&p| settings[p].is_some()));
        let mut total = 0.0;
        let mut count = 0usize;
        for t in 0..self.n_setting_tuples() {
            let x = Self::decode_settings(&self.settings_shape, t);
            if settings.iter().zip(&x).all(|(s, v)| s.is_none_or(|s| s == *v)) {
                total += self.correlator_at(&x, mask)?;
                count += 1;
            }
        }
        Ok(total / count as f64)
    }

    /// Largest deviation, over every proper party subset, of that subset's
    /// marginal from its value at the complementary parties' setting 0.
    pub fn no_signaling_violation(&self) -> f64 {
        let n = self.n_parties;
        let dim = self.n_outcomes();
        let mut worst = 0.0f64;
        for subset in 1..(1usize << n) - 1 {
            // subset bit p (outcome-bit order) marks kept party
            let kept: Vec<usize> = (0..n).filter(|&p| subset >> (n - 1 - p) & 1 == 1).collect();
            for t in 0..self.n_setting_tuples() {
                let x = Self::decode_settings(&self.settings_shape, t);
                let mut base = x.clone();
                for (p, b) in base.iter_mut().enumerate() {
                    if !kept.contains(&p) {
                        *b = 0;
                    }
                }
                if base == x {
                    continue;
                }
                let d1 = self.distribution_at(t);
                let d0 = self.distribution(&base).expect("valid tuple");
                let mut m = vec![0.0; dim];
                for a in 0..dim {
                    m[a & subset] += d1[a] - d0[a];
                }
                worst = m.iter().fold(worst, |w, v| w.max(v.abs()));
            }
        }
        worst
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let n = self.n_parties;
        let mut header: Vec<String> = (0..n).map(|i| format!("setting_{i}")).collect();
        header.extend((0..n).map(|i| format!("outcome_{i}")));
        header.push("probability".into());
        wr.write_record(&header).map_err(csv_err)?;
        for t in 0..self.n_setting_tuples() {
            let x = Self::decode_settings(&self.settings_shape, t);
            for (a, p) in self.distribution_at(t).iter().enumerate() {
                let mut rec: Vec<String> = x.iter().map(usize::to_string).collect();
                rec.extend((0..n).map(|i| format!("{}", self.outcome_sign(a, i) as i32)));
                rec.push(format!("{p:.16e}"));
                wr.write_record(&rec).map_err(csv_err)?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let headers = rd.headers().map_err(csv_err)?.clone();
        let n = headers.iter().filter(|h| h.starts_with("setting_")).count();
        if n == 0 || headers.len() != 2 * n + 1 {
            return Err(Error::Parse { line: 1, msg: "expected setting_i, outcome_i and probability columns".into() });
        }
        let mut rows: Vec<(Vec<usize>, usize, f64)> = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let perr = |msg: String| Error::Parse { line, msg };
            let x: Vec<usize> = (0..n)
                .map(|i| rec[i].parse().map_err(|e| perr(format!("setting_{i}: {e}"))))
                .collect::<Result<_>>()?;
            let mut a = 0usize;
            for i in 0..n {
                a <<= 1;
                match &rec[n + i] {
                    "1" | "+1" => {}
                    "-1" => a |= 1,
                    other => return Err(perr(format!("outcome_{i} must be +1 or -1, got {other:?}"))),
                }
            }
            let p: f64 = rec[2 * n].parse().map_err(|e| perr(format!("probability: {e}")))?;
            rows.push((x, a, p));
        }
        let mut shape = vec![0usize; n];
        for (x, _, _) in &rows {
            for (s, v) in shape.iter_mut().zip(x) {
                *s = (*s).max(v + 1);
            }
        }
        let tuples: usize = shape.iter().product();
        let dim = 1usize << n;
        let mut probs = vec![f64::NAN; tuples * dim];
        for (x, a, p) in rows {
            let mut t = 0;
            for (&s, &v) in shape.iter().zip(&x) {
                t = t * s + v;
            }
            probs[t * dim + a] = p;
        }
        if let Some(missing) = probs.iter().position(|p| p.is_nan()) {
            let x = Self::decode_settings(&shape, missing / dim);
            return Err(Error::MissingSetting(x));
        }
        Self::new(shape, probs)
    }

    pub fn to_json(&self) -> Result<String> {
        let distributions = (0..self.n_setting_tuples())
            .map(|t| {
                let x = Self::decode_settings(&self.settings_shape, t);
                let key: Vec<String> = x.iter().map(usize::to_string).collect();
                (key.join(","), self.distribution_at(t).to_vec())
            })
            .collect();
        let doc = TableJson { n_parties: self.n_parties, settings_shape: self.settings_shape.clone(), distributions };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TableJson = serde_json::from_str(text)?;
        if doc.settings_shape.len() != doc.n_parties {
            return Err(invalid("settings_shape length differs from n_parties"));
        }
        let tuples: usize = doc.settings_shape.iter().product();
        let mut probs = Vec::with_capacity(tuples << doc.n_parties);
        for t in 0..tuples {
            let x = Self::decode_settings(&doc.settings_shape, t);
            let key: Vec<String> = x.iter().map(usize::to_string).collect();
            let dist = doc.distributions.get(&key.join(",")).ok_or_else(|| Error::MissingSetting(x.clone()))?;
            probs.extend_from_slice(dist);
        }
        Self::new(doc.settings_shape, probs)
    }
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, msg: e.to_string() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{correlation_table, ghz, standard_settings};

    fn sample_table() -> CorrelationTable {
        let st = ghz(3).unwrap().with_visibility(0.77).unwrap();
        correlation_table(&st, &standard_settings(3).unwrap()).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample_table();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = CorrelationTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let t = sample_table();
        let back = CorrelationTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(CorrelationTable::new(vec![2, 2], vec![0.25; 15]).is_err());
        assert!(CorrelationTable::new(vec![1, 1], vec![0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(CorrelationTable::new(vec![1, 1], vec![1.5, -0.5, 0.0, 0.0]).is_err());
        let csv = "setting_0,setting_1,outcome_0,outcome_1,probability\n0,0,1,2,0.5\n";
        assert!(matches!(CorrelationTable::read_csv(csv.as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn signaling_table_is_detected() {
        // party 1 copies party 0's setting into its outcome
        let t = CorrelationTable::from_fn(vec![2, 1], |x, a| if a == (x[0] & 1) { 1.0 } else { 0.0 }).unwrap();
        assert!(t.no_signaling_violation() > 0.5);
        assert!(CorrelationTable::uniform(vec![2, 3, 2]).unwrap().no_signaling_violation() < 1e-15);
    }
}
