//! Implicit unitary evolution under a time-dependent gate sequence.

use super::{DotArray, ShuttleError, VoltageSequence, HBAR2_OVER_2ME, HBAR_MEV_NS, MAX_LEVELS};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    /// time step, ns
    pub dt_ns: f64,
    /// steps between snapshots
    pub snapshot_stride: usize,
    /// eigenvalues kept per snapshot
    pub levels: usize,
    /// steps that share one potential (sampled at the block midpoint) while
    /// the gates move slowly
    pub refresh_steps: usize,
    pub scheme: Scheme,
    /// keep the wavefunction at every snapshot
    pub keep_states: bool,
}

/// Rational approximants of exp(−iH·dt/ħ); both are unitary for Hermitian H.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// (1,1) Padé, second order
    CrankNicolson,
    /// (2,2) Padé as a product of two Cayley factors, fourth order
    Pade4,
}

impl Scheme {
    /// Roots z_k of the Padé numerator in z = −iH·dt/ħ; each contributes a
    /// factor (1 − z/z_k)/(1 + z/z_k).
    fn roots(self) -> Vec<Complex64> {
        match self {
            Scheme::CrankNicolson => vec![Complex64::new(-2.0, 0.0)],
            Scheme::Pade4 => vec![Complex64::new(-3.0, 3f64.sqrt()), Complex64::new(-3.0, -(3f64.sqrt()))],
        }
    }
}

/// (1 − γH)x = (1 + γH)y on the tridiagonal grid Hamiltonian.
struct Factor {
    gamma: Complex64,
    bdiag: Vec<Complex64>,
    cprime: Vec<Complex64>,
    inv: Vec<Complex64>,
}

impl Factor {
    fn new(gamma: Complex64, n: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Factor { gamma, bdiag: vec![zero; n], cprime: vec![zero; n], inv: vec![zero; n] }
    }

    /// `diag` is the Hamiltonian diagonal, `hop` minus its off-diagonal.
    fn factorize(&mut self, diag: &[f64], hop: f64) {
        let off = self.gamma * hop;
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..diag.len() {
            let a = Complex64::new(1.0, 0.0) - self.gamma * diag[i];
            self.bdiag[i] = Complex64::new(2.0, 0.0) - a;
            self.inv[i] = (a - off * prev).inv();
            prev = off * self.inv[i];
            self.cprime[i] = prev;
        }
    }

    fn apply(&self, psi: &mut [Complex64], rhs: &mut [Complex64], hop: f64) {
        let n = psi.len();
        let off = self.gamma * hop;
        let zero = Complex64::new(0.0, 0.0);
        // forward sweep fused with forming (1 + γH)ψ, whose off-diagonal is −off
        let mut carry = zero;
        let mut left = zero;
        for i in 0..n {
            let right = if i + 1 < n { psi[i + 1] } else { zero };
            let b = self.bdiag[i] * psi[i] - off * (left + right);
            // (b − off·carry)/w with off/w = c′ keeps one product on the chain
            carry = b * self.inv[i] - self.cprime[i] * carry;
            rhs[i] = carry;
            left = psi[i];
        }
        let mut next = zero;
        for i in (0..n).rev() {
            next = rhs[i] - self.cprime[i] * next;
            psi[i] = next;
        }
    }
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig { dt_ns: 1e-6, snapshot_stride: 2000, levels: 4, refresh_steps: 8, scheme: Scheme::Pade4, keep_states: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub t_ns: f64,
    /// |⟨Ψ_g(t)|Ψ(t)⟩|²
    pub fidelity: f64,
    pub norm: f64,
    /// ⟨E_z⟩ in V/nm
    pub ez: f64,
    pub x_mean: f64,
    pub x_std: f64,
    pub energies: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ShuttleTrajectory {
    pub array: DotArray,
    pub sequence: VoltageSequence,
    pub dt_ns: f64,
    pub snapshots: Vec<Snapshot>,
    /// per snapshot, when requested
    pub states: Vec<Vec<Complex64>>,
}

impl ShuttleTrajectory {
    pub fn final_fidelity(&self) -> f64 {
        self.snapshots.last().map_or(f64::NAN, |s| s.fidelity)
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t_ns).collect()
    }

    pub fn ez(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.ez).collect()
    }

    /// Largest |norm − 1| over the snapshots.
    pub fn norm_drift(&self) -> f64 {
        self.snapshots.iter().map(|s| (s.norm - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn observe(array: &DotArray, volts: &[f64], psi: &[Complex64], t: f64, levels: usize) -> Result<Snapshot, ShuttleError> {
    let s = array.spectrum(volts, levels)?;
    let ez = array.ez_field(volts);
    let mut norm = 0.0;
    let mut amp = Complex64::new(0.0, 0.0);
    let (mut e, mut x1, mut x2) = (0.0, 0.0, 0.0);
    for i in 0..psi.len() {
        let p = psi[i].norm_sqr();
        norm += p;
        amp += psi[i] * s.states[0][i];
        e += p * ez[i];
        x1 += p * array.grid[i];
        x2 += p * array.grid[i] * array.grid[i];
    }
    let x_mean = x1 / norm;
    Ok(Snapshot {
        t_ns: t,
        fidelity: amp.norm_sqr(),
        norm,
        ez: e / norm,
        x_mean,
        x_std: (x2 / norm - x_mean * x_mean).max(0.0).sqrt(),
        energies: s.energies,
    })
}

/// Evolves the ground state of the initial voltages through `sequence`.
/// Snapshots are taken every `snapshot_stride` steps and at the end.
pub fn propagate(array: &DotArray, sequence: &VoltageSequence, cfg: &PropagationConfig) -> Result<ShuttleTrajectory, ShuttleError> {
    if cfg.levels == 0 || cfg.levels > MAX_LEVELS || cfg.snapshot_stride == 0 || cfg.refresh_steps == 0 {
        return Err(ShuttleError::Spec("levels must be in 1..=8, snapshot_stride and refresh_steps positive".into()));
    }
    if sequence.gate_count() != array.dot_count() {
        return Err(ShuttleError::Spec("sequence and array disagree on the gate count".into()));
    }
    let duration = sequence.duration();
    let steps = (duration / cfg.dt_ns).round().max(1.0) as usize;
    let dt = duration / steps as f64;
    let n = array.len();
    let spacing = array.spec.grid_spacing_nm;
    let hop = HBAR2_OVER_2ME / array.spec.effective_mass / (spacing * spacing);

    let mut volts = sequence.at(0.0);
    let mut pot = array.potential(&volts);
    // dt must resolve the potential range and the bound levels
    let init = array.spectrum(&volts, cfg.levels)?;
    let vmax = pot.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = pot.iter().cloned().fold(f64::INFINITY, f64::min);
    let e_max = (vmax - vmin).max(init.energies[cfg.levels - 1] - vmin);
    let ratio = dt * e_max / HBAR_MEV_NS;
    if ratio >= 0.1 {
        return Err(ShuttleError::TimeStep(ratio));
    }

    let mut psi: Vec<Complex64> = init.states[0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut snapshots = vec![observe(array, &volts, &psi, 0.0, cfg.levels)?];
    let mut states = Vec::new();
    if cfg.keep_states {
        states.push(psi.clone());
    }

    let mut factors: Vec<Factor> = cfg
        .scheme
        .roots()
        .into_iter()
        .map(|z| Factor::new(Complex64::new(0.0, dt / HBAR_MEV_NS) / z, n))
        .collect();
    let mut hdiag = vec![0.0; n];
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    // blocks that contain a knot or move a gate by more than this are
    // refreshed every step
    const FINE_BLOCK_VOLTS: f64 = 1e-5;
    let mut fine = false;
    for step in 0..steps {
        if step % cfg.refresh_steps == 0 {
            let block = cfg.refresh_steps.min(steps - step);
            let (t0, t1) = (step as f64 * dt, (step + block) as f64 * dt);
            let moved = sequence.at(t0).iter().zip(sequence.at(t1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            fine = block > 1 && (moved > FINE_BLOCK_VOLTS || sequence.times.iter().any(|&k| k > t0 && k < t1));
        }
        if fine || step % cfg.refresh_steps == 0 {
            let block = if fine { 1 } else { cfg.refresh_steps.min(steps - step) };
            let t_mid = (step as f64 + 0.5 * block as f64) * dt;
            sequence.at_into(t_mid, &mut volts);
            array.potential_into(&volts, &mut pot);
            // a c-number shift keeping the bound levels near zero energy,
            // where the rational approximant's phase error is smallest
            let e_ref = init.energies[0] + pot.iter().cloned().fold(f64::INFINITY, f64::min) - vmin;
            for i in 0..n {
                hdiag[i] = 2.0 * hop + pot[i] - e_ref;
            }
            factors.iter_mut().for_each(|f| f.factorize(&hdiag, hop));
        }
        for f in &factors {
            f.apply(&mut psi, &mut rhs, hop);
        }
        let done = step + 1;
        if done % cfg.snapshot_stride == 0 || done == steps {
            let t = done as f64 * dt;
            sequence.at_into(t, &mut volts);
            let snap = observe(array, &volts, &psi, t, cfg.levels)?;
            let drift = (snap.norm - 1.0).abs();
            if drift > 1e-8 {
                return Err(ShuttleError::NormDrift { drift, t_ns: t });
            }
            snapshots.push(snap);
            if cfg.keep_states {
                states.push(psi.clone());
            }
        }
    }
    Ok(ShuttleTrajectory { array: array.clone(), sequence: sequence.clone(), dt_ns: dt, snapshots, states })
}

/// ħ Σ_{m≠g} |⟨ψ_m|ψ̇_g⟩| / |E_m − E_g| at each snapshot, with ψ̇_g from a
/// centred difference of the instantaneous ground state. Pairs closer than
/// 1e-12 meV are skipped.
pub fn adiabaticity_metric(traj: &ShuttleTrajectory, levels: usize) -> Result<Vec<f64>, ShuttleError> {
    let array = &traj.array;
    let seq = &traj.sequence;
    let h = 1e-6 * seq.duration();
    let ground = |t: f64| -> Result<Vec<f64>, ShuttleError> { Ok(array.spectrum(&seq.at(t), 1)?.states.swap_remove(0)) };
    let mut out = Vec::with_capacity(traj.snapshots.len());
    for snap in &traj.snapshots {
        let t = snap.t_ns;
        let s = array.spectrum(&seq.at(t), levels)?;
        let (ta, tb) = ((t - h).max(0.0), (t + h).min(seq.duration()));
        let mut a = ground(ta)?;
        let mut b = ground(tb)?;
        for v in [&mut a, &mut b] {
            let o: f64 = v.iter().zip(&s.states[0]).map(|(x, y)| x * y).sum();
            if o < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
        }
        let mut total = 0.0;
        for m in 1..levels {
            let gap = (s.energies[m] - s.energies[0]).abs();
            if gap < 1e-12 {
                log::warn!("degenerate levels 0 and {m} at t = {t} ns");
                continue;
            }
            let d: f64 = s.states[m].iter().zip(a.iter().zip(&b)).map(|(p, (x, y))| p * (y - x)).sum::<f64>() / (tb - ta);
            total += d.abs() / gap;
        }
        out.push(HBAR_MEV_NS * total);
    }
    Ok(out)
}
