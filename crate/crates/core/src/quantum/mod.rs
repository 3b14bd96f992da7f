//! Dense state-vector engine for small qubit networks.
//!
//! Qubit `q` of an `N`-qubit register is the `(N-1-q)`-th bit of a basis
//! index, so `|100>` is index 4. Noisy states are the white-noise family
//! `η|ψ><ψ| + (1-η) I / 2^N`; density matrices are never built.

mod table;

pub use table::CorrelationTable;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::error::{invalid, Error, Result};

pub const MAX_QUBITS: usize = 12;

/// Dichotomic qubit observable `x X + y Y + z Z` with unit Bloch vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    bloch: [f64; 3],
}

impl Observable {
    pub const X: Self = Self { bloch: [1.0, 0.0, 0.0] };
    pub const Y: Self = Self { bloch: [0.0, 1.0, 0.0] };
    pub const Z: Self = Self { bloch: [0.0, 0.0, 1.0] };

    /// Requires a unit vector (within 1e-12).
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("Bloch vector ({x}, {y}, {z}) has norm {norm}, expected 1")));
        }
        Ok(Self { bloch: [x, y, z] })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_direction(v: [f64; 3]) -> Result<Self> {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(invalid("cannot normalize a zero Bloch vector"));
        }
        Ok(Self { bloch: [v[0] / norm, v[1] / norm, v[2] / norm] })
    }

    /// Observable in the x-z plane at angle `theta` from Z.
    pub fn xz(theta: f64) -> Self {
        Self { bloch: [theta.sin(), 0.0, theta.cos()] }
    }

    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self { bloch: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()] }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let v: [f64; 3] = UnitSphere.sample(rng);
        Self::from_direction(v).unwrap_or(Self::Z)
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    /// 2x2 matrix `[[z, x - iy], [x + iy, -z]]` in row-major order.
    pub fn matrix(&self) -> [Complex64; 4] {
        let [x, y, z] = self.bloch;
        [
            Complex64::new(z, 0.0),
            Complex64::new(x, -y),
            Complex64::new(x, y),
            Complex64::new(-z, 0.0),
        ]
    }

    /// Rows are `<+n|` and `<-n|`, so applying it rotates the eigenbasis
    /// onto the computational basis (outcome +1 on `|0>`).
    fn eigenbasis_rows(&self) -> [Complex64; 4] {
        let [x, y, z] = self.bloch;
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = y.atan2(x);
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let e = Complex64::from_polar(1.0, phi);
        // |+> = (c, e s), |-> = (s, -e c)
        [Complex64::new(c, 0.0), (e * s).conj(), Complex64::new(s, 0.0), -(e * c).conj()]
    }
}

/// Pure amplitudes plus white-noise visibility.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpec {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
    visibility: f64,
}

fn check_qubits(n: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(invalid(format!("qubit count {n} outside [2, {MAX_QUBITS}]")));
    }
    Ok(())
}

impl StateSpec {
    pub fn new(amplitudes: Vec<Complex64>, visibility: f64) -> Result<Self> {
        let dim = amplitudes.len();
        if !dim.is_power_of_two() {
            return Err(invalid(format!("amplitude vector length {dim} is not a power of two")));
        }
        let n = dim.trailing_zeros() as usize;
        check_qubits(n)?;
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("amplitude vector has norm {norm}, expected 1")));
        }
        Self { n_qubits: n, amplitudes, visibility: 1.0 }.with_visibility(visibility)
    }

    pub fn with_visibility(mut self, visibility: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(invalid(format!("visibility {visibility} outside [0, 1]")));
        }
        self.visibility = visibility;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

pub fn ghz(n: usize) -> Result<StateSpec> {
    generalized_ghz(n, 0.0)
}

/// `sqrt((1+ξ)/2)|0...0> + sqrt((1-ξ)/2)|1...1>`.
pub fn generalized_ghz(n: usize, xi: f64) -> Result<StateSpec> {
    check_qubits(n)?;
    if !(-1.0..=1.0).contains(&xi) {
        return Err(invalid(format!("xi = {xi} outside [-1, 1]")));
    }
    let dim = 1usize << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = Complex64::new(((1.0 + xi) / 2.0).sqrt(), 0.0);
    amps[dim - 1] = Complex64::new(((1.0 - xi) / 2.0).sqrt(), 0.0);
    Ok(StateSpec { n_qubits: n, amplitudes: amps, visibility: 1.0 })
}

/// `h0|000> + h1 e^{iφ}|100> + h2|101> + h3|110> + h4|111>`.
pub fn canonical_three_qubit(h: [f64; 5], phi: f64) -> Result<StateSpec> {
    check_canonical(h)?;
    let mut amps = vec![Complex64::new(0.0, 0.0); 8];
    amps[0b000] = Complex64::new(h[0], 0.0);
    amps[0b100] = Complex64::from_polar(h[1], phi);
    amps[0b101] = Complex64::new(h[2], 0.0);
    amps[0b110] = Complex64::new(h[3], 0.0);
    amps[0b111] = Complex64::new(h[4], 0.0);
    // renormalize away the input tolerance so the state invariant holds tightly
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in &mut amps {
        *a /= norm;
    }
    Ok(StateSpec { n_qubits: 3, amplitudes: amps, visibility: 1.0 })
}

pub(crate) fn check_canonical(h: [f64; 5]) -> Result<()> {
    if h.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(invalid(format!("canonical coefficients must be nonnegative, got {h:?}")));
    }
    let sum: f64 = h.iter().map(|v| v * v).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("canonical coefficients have squared norm {sum}, expected 1")));
    }
    Ok(())
}

/// Applies a single-qubit matrix to qubit `q` in place.
fn apply_single(amps: &mut [Complex64], n: usize, q: usize, m: &[Complex64; 4]) {
    let bit = 1usize << (n - 1 - q);
    for i in 0..amps.len() {
        if i & bit == 0 {
            let (a0, a1) = (amps[i], amps[i | bit]);
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[i | bit] = m[2] * a0 + m[3] * a1;
        }
    }
}

/// `Tr(ρ_η O)` for a tensor product of per-qubit observables (`None` is the
/// identity).
pub fn expectation(state: &StateSpec, ops: &[Option<Observable>]) -> Result<f64> {
    let n = state.n_qubits;
    if ops.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: ops.len() });
    }
    if ops.iter().all(Option::is_none) {
        return Err(invalid("expectation needs at least one non-identity factor"));
    }
    let mut phi = state.amplitudes.clone();
    for (q, op) in ops.iter().enumerate() {
        if let Some(o) = op {
            apply_single(&mut phi, n, q, &o.matrix());
        }
    }
    let inner: Complex64 = state.amplitudes.iter().zip(&phi).map(|(a, b)| a.conj() * b).sum();
    if inner.im.abs() > 1e-10 {
        return Err(Error::Solver(format!("expectation has imaginary residue {}", inner.im)));
    }
    // every non-identity factor is traceless, so the white-noise part vanishes
    Ok(state.visibility * inner.re)
}

/// Ordered observables per party.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementScenario {
    pub settings: Vec<Vec<Observable>>,
}

impl MeasurementScenario {
    pub fn new(settings: Vec<Vec<Observable>>) -> Result<Self> {
        if settings.iter().any(Vec::is_empty) {
            return Err(invalid("every party needs at least one setting"));
        }
        Ok(Self { settings })
    }

    pub fn n_parties(&self) -> usize {
        self.settings.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.settings.iter().map(Vec::len).collect()
    }

    pub fn observable(&self, party: usize, setting: usize) -> Result<Observable> {
        self.settings
            .get(party)
            .and_then(|s| s.get(setting))
            .copied()
            .ok_or_else(|| Error::MissingSetting(vec![party, setting]))
    }

    /// Relabels parties: party `i` of the result is party `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        crate::bellfunc::check_permutation(perm, self.n_parties())?;
        Ok(Self { settings: perm.iter().map(|&p| self.settings[p].clone()).collect() })
    }
}

/// `A_0 = C_0 = ... = Z`, `A_1 = C_1 = ... = X`, `B_{0,1} = (Z ± X)/√2`.
pub fn standard_settings(n: usize) -> Result<MeasurementScenario> {
    if n < 3 {
        return Err(invalid(format!("standard settings need at least 3 parties, got {n}")));
    }
    let b = vec![Observable::xz(std::f64::consts::FRAC_PI_4), Observable::xz(-std::f64::consts::FRAC_PI_4)];
    let settings = (0..n)
        .map(|p| if p == 1 { b.clone() } else { vec![Observable::Z, Observable::X] })
        .collect();
    Ok(MeasurementScenario { settings })
}

/// Born-rule table for every setting tuple of `scenario`.
pub fn correlation_table(state: &StateSpec, scenario: &MeasurementScenario) -> Result<CorrelationTable> {
    correlation_table_threads(state, scenario, 1)
}

/// As [`correlation_table`], splitting setting tuples across `threads`
/// scoped workers. The result does not depend on the thread count.
pub fn correlation_table_threads(
    state: &StateSpec,
    scenario: &MeasurementScenario,
    threads: usize,
) -> Result<CorrelationTable> {
    let n = state.n_qubits;
    if scenario.n_parties() != n {
        return Err(Error::DimensionMismatch { expected: n, got: scenario.n_parties() });
    }
    let shape = scenario.shape();
    let n_tuples: usize = shape.iter().product();
    let dim = state.dim();
    let rotations: Vec<Vec<[Complex64; 4]>> = scenario
        .settings
        .iter()
        .map(|s| s.iter().map(Observable::eigenbasis_rows).collect())
        .collect();
    let eta = state.visibility;
    let noise = (1.0 - eta) / dim as f64;
    let fill = |tuple_idx: usize, out: &mut [f64]| {
        let x = CorrelationTable::decode_settings(&shape, tuple_idx);
        let mut phi = state.amplitudes.clone();
        for (q, &s) in x.iter().enumerate() {
            apply_single(&mut phi, n, q, &rotations[q][s]);
        }
        for (o, a) in out.iter_mut().zip(&phi) {
            *o = eta * a.norm_sqr() + noise;
        }
    };
    let mut probs = vec![0.0; n_tuples * dim];
    let threads = threads.max(1).min(n_tuples);
    if threads <= 1 {
        for (t, chunk) in probs.chunks_mut(dim).enumerate() {
            fill(t, chunk);
        }
    } else {
        let per = n_tuples.div_ceil(threads);
        std::thread::scope(|scope| {
            for (w, block) in probs.chunks_mut(per * dim).enumerate() {
                let fill = &fill;
                scope.spawn(move || {
                    for (i, chunk) in block.chunks_mut(dim).enumerate() {
                        fill(w * per + i, chunk);
                    }
                });
            }
        });
    }
    CorrelationTable::new(shape, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn obs(ops: &[Option<Observable>], state: &StateSpec) -> f64 {
        expectation(state, ops).unwrap()
    }

    /// Independent oracle: builds the full 2^N x 2^N operator by Kronecker
    /// products and computes <ψ|O|ψ>.
    fn dense_expectation(state: &StateSpec, ops: &[Option<Observable>]) -> f64 {
        let id = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        let mut op = vec![Complex64::new(1.0, 0.0)];
        let mut d = 1;
        for o in ops {
            let m = o.map_or(id, |o| o.matrix());
            let mut next = vec![Complex64::new(0.0, 0.0); 4 * d * d];
            for i in 0..d {
                for j in 0..d {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[(2 * i + a) * 2 * d + 2 * j + b] = op[i * d + j] * m[2 * a + b];
                        }
                    }
                }
            }
            op = next;
            d *= 2;
        }
        let psi = state.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += psi[i].conj() * op[i * d + j] * psi[j];
            }
        }
        acc.re
    }

    #[test]
    fn ghz_amplitudes() {
        let s = ghz(3).unwrap();
        assert!((s.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((s.amplitudes()[7].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(ghz(13).is_err());
        assert!(ghz(1).is_err());
        let norm: f64 = ghz(4).unwrap().amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_ghz_endpoints() {
        assert_eq!(generalized_ghz(3, 0.0).unwrap(), ghz(3).unwrap());
        let p = generalized_ghz(3, 1.0).unwrap();
        assert_eq!(p.amplitudes()[0].re, 1.0);
        assert_eq!(p.amplitudes()[7].re, 0.0);
        let h = generalized_ghz(3, 0.5).unwrap();
        assert!((h.amplitudes()[0].re - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((h.amplitudes()[7].re - 0.25f64.sqrt()).abs() < 1e-15);
        assert!(generalized_ghz(3, 1.5).is_err());
    }

    #[test]
    fn canonical_special_cases() {
        let g = canonical_three_qubit([FRAC_1_SQRT_2, 0.0, 0.0, 0.0, FRAC_1_SQRT_2], 0.0).unwrap();
        for (a, b) in g.amplitudes().iter().zip(ghz(3).unwrap().amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
        let p = canonical_three_qubit([1.0, 0.0, 0.0, 0.0, 0.0], 1.0).unwrap();
        assert_eq!(p.amplitudes()[0].re, 1.0);
        let s = 0.9f64.sqrt() / 5f64.sqrt();
        assert!(canonical_three_qubit([s; 5], 0.0).is_err());
    }

    #[test]
    fn stabilizer_expectations() {
        let s = ghz(3).unwrap();
        let z = Some(Observable::Z);
        let x = Some(Observable::X);
        assert!((obs(&[z, z, None], &s) - 1.0).abs() < 1e-12);
        assert!((obs(&[x, x, x], &s) - 1.0).abs() < 1e-12);
        for xi in [0.0, 0.3, -0.7, 0.91] {
            let g = generalized_ghz(3, xi).unwrap();
            let v = obs(&[x, x, x], &g);
            assert!((v - (1.0 - xi * xi).sqrt()).abs() < 1e-12);
            assert!((v - dense_expectation(&g, &[x, x, x])).abs() < 1e-12);
        }
        let noisy = ghz(4).unwrap().with_visibility(0.5).unwrap();
        assert!((obs(&[z, z, None, None], &noisy) - 0.5).abs() < 1e-12);
        assert!(expectation(&s, &[z, z]).is_err());
        assert!(expectation(&s, &[None, None, None]).is_err());
    }

    #[test]
    fn engine_matches_dense_oracle_on_random_operators() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = [0.5, 0.3, 0.4, 0.2, (1.0f64 - 0.25 - 0.09 - 0.16 - 0.04).sqrt()];
        let state = canonical_three_qubit(h, 0.7).unwrap();
        for _ in 0..50 {
            let ops: Vec<Option<Observable>> =
                (0..3).map(|_| if rng.gen_bool(0.8) { Some(Observable::random(&mut rng)) } else { None }).collect();
            if ops.iter().all(Option::is_none) {
                continue;
            }
            let a = obs(&ops, &state);
            assert!((a - dense_expectation(&state, &ops)).abs() < 1e-12);
        }
    }

    #[test]
    fn standard_settings_shape() {
        let s = standard_settings(3).unwrap();
        let b0 = s.observable(1, 0).unwrap().bloch();
        assert!((b0[0] - FRAC_1_SQRT_2).abs() < 1e-15 && b0[1] == 0.0 && (b0[2] - FRAC_1_SQRT_2).abs() < 1e-15);
        let s4 = standard_settings(4).unwrap();
        assert_eq!(s4.n_parties(), 4);
        assert_eq!(s4.settings[3], vec![Observable::Z, Observable::X]);
        for party in &s4.settings {
            for o in party {
                let [x, y, z] = o.bloch();
                assert!(((x * x + y * y + z * z).sqrt() - 1.0).abs() < 1e-12);
            }
        }
        assert!(standard_settings(2).is_err());
    }

    #[test]
    fn table_reproduces_expectations() {
        let state = ghz(3).unwrap().with_visibility(0.8).unwrap();
        let sc = standard_settings(3).unwrap();
        let table = correlation_table(&state, &sc).unwrap();
        assert!(table.no_signaling_violation() < 1e-10);
        let all = [[0, 0, 0], [1, 0, 1], [0, 1, 1], [1, 1, 0]];
        for x in all {
            let ops: Vec<Option<Observable>> = (0..3).map(|p| Some(sc.settings[p][x[p]])).collect();
            let direct = expectation(&state, &ops).unwrap();
            let from_table = table.correlator(&[Some(x[0]), Some(x[1]), Some(x[2])]).unwrap();
            assert!((direct - from_table).abs() < 1e-12);
        }
        // (a, c) perfectly correlated under Z Z for the pure state
        let pure = correlation_table(&ghz(3).unwrap(), &sc).unwrap();
        let ac = pure.correlator(&[Some(0), None, Some(0)]).unwrap();
        assert!((ac - 1.0).abs() < 1e-12);
    }

    #[test]
    fn threaded_table_is_identical() {
        let state = ghz(4).unwrap().with_visibility(0.9).unwrap();
        let sc = standard_settings(4).unwrap();
        let a = correlation_table(&state, &sc).unwrap();
        let b = correlation_table_threads(&state, &sc, 3).unwrap();
        assert_eq!(a, b);
    }
}
