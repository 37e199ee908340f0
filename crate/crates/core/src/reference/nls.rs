use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::fft::FftPlan;
use super::field::{FieldMeta, FieldValues, ReferenceField};

pub const NLS_X_MIN: f64 = -5.0;
pub const NLS_X_MAX: f64 = 5.0;
pub const DEFAULT_MODES: usize = 256;
/// Desk-scale time step.
pub const DEFAULT_DT: f64 = PI / 2.0 * 1e-4;
/// The finer step used for the published reference.
pub const FINE_DT: f64 = PI / 2.0 * 1e-6;
pub const BLOWUP_LIMIT: f64 = 1e6;

#[derive(Clone, Debug)]
pub struct NlsOptions {
    pub n_modes: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Times at which to record the solution; `t_end` alone when empty.
    pub record_times: Vec<f64>,
    /// Zero the upper third of the spectrum of the nonlinear term.
    pub dealias: bool,
    /// Drop `|u|²u` to integrate the linear equation.
    pub nonlinear: bool,
    /// Initial grid values; `2 sech x` when `None`.
    pub initial: Option<Vec<Complex64>>,
}

impl NlsOptions {
    pub fn new(n_modes: usize, dt: f64, t_end: f64, record_times: Vec<f64>) -> Self {
        NlsOptions {
            n_modes,
            dt,
            t_end,
            record_times,
            dealias: false,
            nonlinear: true,
            initial: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NlsSolution {
    /// `(ψ, φ)` at the record times on the periodic grid.
    pub field: ReferenceField,
    /// `Δx Σ|u_j|²` at each record time.
    pub mass: Vec<f64>,
    pub initial_mass: f64,
    /// Largest `|M(t) − M(0)| / M(0)` seen at any step.
    pub max_mass_drift: f64,
    pub steps: usize,
}

/// Grid `x_j = −5 + jΔx`, `j < n`, of the periodic domain.
pub fn nls_grid(n_modes: usize) -> Vec<f64> {
    let dx = (NLS_X_MAX - NLS_X_MIN) / n_modes as f64;
    (0..n_modes).map(|j| NLS_X_MIN + j as f64 * dx).collect()
}

/// Fourier-spectral RK4 solution of `i u_t + ½u_xx + |u|²u = 0` on the
/// periodic box `[−5, 5)` from `u₀ = 2 sech x`.
pub fn nls_spectral_solve(
    n_modes: usize,
    dt: f64,
    t_end: f64,
    record_times: &[f64],
) -> Result<NlsSolution> {
    nls_solve_with(&NlsOptions::new(n_modes, dt, t_end, record_times.to_vec()))
}

struct Rhs {
    plan: FftPlan,
    /// `−½k²` per mode.
    lin: Vec<f64>,
    keep: Vec<bool>,
    nonlinear: bool,
    scratch: Vec<Complex64>,
}

impl Rhs {
    /// `û' = −½ i k² û + i FFT(|u|² u)`. Returns `max_j |u_j|` and the mass
    /// sum `Σ|u_j|²` of the physical state.
    fn eval(&mut self, u_hat: &[Complex64], out: &mut [Complex64]) -> Result<(f64, f64)> {
        let i = Complex64::new(0.0, 1.0);
        self.scratch.copy_from_slice(u_hat);
        self.plan.process(&mut self.scratch, true)?;
        let mut max_abs: f64 = 0.0;
        let mut mass = 0.0;
        for u in &mut self.scratch {
            let m = u.norm_sqr();
            max_abs = max_abs.max(m);
            mass += m;
            *u *= m;
        }
        if self.nonlinear {
            self.plan.process(&mut self.scratch, false)?;
        }
        for k in 0..u_hat.len() {
            let mut o = i * self.lin[k] * u_hat[k];
            if self.nonlinear && self.keep[k] {
                o += i * self.scratch[k];
            }
            out[k] = o;
        }
        Ok((max_abs.sqrt(), mass))
    }
}

pub fn nls_solve_with(opts: &NlsOptions) -> Result<NlsSolution> {
    let n = opts.n_modes;
    let plan = FftPlan::new(n)?;
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::BadStep(format!("time step {}", opts.dt)));
    }
    if !(opts.t_end >= 0.0 && opts.t_end.is_finite()) {
        return Err(Error::BadStep(format!("final time {}", opts.t_end)));
    }
    let mut records = if opts.record_times.is_empty() {
        vec![opts.t_end]
    } else {
        opts.record_times.clone()
    };
    if let Some(&bad) = records.iter().find(|&&t| !(0.0..=opts.t_end).contains(&t)) {
        return Err(Error::BadStep(format!(
            "record time {bad} outside [0, {}]",
            opts.t_end
        )));
    }
    records.sort_by(f64::total_cmp);

    let x = nls_grid(n);
    let dx = (NLS_X_MAX - NLS_X_MIN) / n as f64;
    let length = NLS_X_MAX - NLS_X_MIN;
    let mut lin = vec![0.0; n];
    let mut keep = vec![true; n];
    for (k, (l, kp)) in lin.iter_mut().zip(&mut keep).enumerate() {
        let idx = if k < n / 2 {
            k as f64
        } else {
            k as f64 - n as f64
        };
        let wave = 2.0 * PI * idx / length;
        *l = -0.5 * wave * wave;
        *kp = !opts.dealias || 3.0 * idx.abs() < n as f64;
    }

    let mut u_hat: Vec<Complex64> = match &opts.initial {
        Some(u0) => {
            if u0.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: u0.len(),
                });
            }
            u0.clone()
        }
        None => x
            .iter()
            .map(|&x| Complex64::new(2.0 / x.cosh(), 0.0))
            .collect(),
    };
    plan.process(&mut u_hat, false)?;

    let mut rhs = Rhs {
        plan: plan.clone(),
        lin,
        keep,
        nonlinear: opts.nonlinear,
        scratch: vec![Complex64::new(0.0, 0.0); n],
    };
    let mass_of = |u_hat: &[Complex64]| -> Result<f64> {
        let mut u = u_hat.to_vec();
        plan.process(&mut u, true)?;
        Ok(dx * u.iter().map(|z| z.norm_sqr()).sum::<f64>())
    };
    let initial_mass = mass_of(&u_hat)?;

    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut stage = vec![zero; n];
    let mut t = 0.0;
    let mut steps = 0;
    let mut max_drift: f64 = 0.0;
    let mut values = Vec::with_capacity(records.len() * n);
    let mut mass = Vec::with_capacity(records.len());

    for &target in &records {
        while target - t > 1e-12 * opts.dt {
            let h = if target - t < opts.dt * (1.0 + 1e-9) {
                target - t
            } else {
                opts.dt
            };
            let (max_abs, m) = rhs.eval(&u_hat, &mut k1)?;
            if max_abs.is_nan() || max_abs > BLOWUP_LIMIT {
                return Err(Error::UnstableBlowup { t, max_abs });
            }
            max_drift = max_drift.max((dx * m - initial_mass).abs() / initial_mass);
            for j in 0..n {
                stage[j] = u_hat[j] + k1[j] * (0.5 * h);
            }
            rhs.eval(&stage, &mut k2)?;
            for j in 0..n {
                stage[j] = u_hat[j] + k2[j] * (0.5 * h);
            }
            rhs.eval(&stage, &mut k3)?;
            for j in 0..n {
                stage[j] = u_hat[j] + k3[j] * h;
            }
            rhs.eval(&stage, &mut k4)?;
            for j in 0..n {
                u_hat[j] += (k1[j] + (k2[j] + k3[j]) * 2.0 + k4[j]) * (h / 6.0);
            }
            t = if h == opts.dt { t + h } else { target };
            steps += 1;
        }
        t = target;
        let mut u = u_hat.clone();
        plan.process(&mut u, true)?;
        let max_abs = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max_abs.is_nan() || max_abs > BLOWUP_LIMIT {
            return Err(Error::UnstableBlowup { t, max_abs });
        }
        let m = dx * u.iter().map(|z| z.norm_sqr()).sum::<f64>();
        max_drift = max_drift.max((m - initial_mass).abs() / initial_mass);
        mass.push(m);
        values.extend(u.iter().map(|z| [z.re, z.im]));
    }

    let field = ReferenceField::new(
        records,
        x,
        FieldValues::Complex(values),
        FieldMeta {
            method: "fourier rk4".into(),
            resolution: n,
            dt: opts.dt,
        },
    )?;
    Ok(NlsSolution {
        field,
        mass,
        initial_mass,
        max_mass_drift: max_drift,
        steps,
    })
}
