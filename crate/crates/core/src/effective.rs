//! Rotating-wave effective Hamiltonians and a brute-force check of the
//! first-order Magnus correction at stroboscopic times.
//!
//! In the frame co-rotating with the carrier (`omega_LO`, phase 0) the drive
//! Hamiltonian is
//!
//! ```text
//! Hbar(t) = -delta sz/2 + a sin(2 w t) sx/2 + a (1 - cos(2 w t)) sy/2,   a = Omega_d d
//! ```
//!
//! Averaging over full periods gives the RWA term `-delta sz/2 + a sy/2`.
//! The next Magnus order adds the Bloch-Siegert shift `-3 a^2 / (4 w)` to the
//! `sz/2` coefficient and reduces the Rabi term by `a delta / (2 w)`.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Truncation order of the effective Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    /// Rotating wave approximation.
    Rwa0,
    /// RWA plus the first Magnus correction.
    Rwa1,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// `delta = omega_q - omega_LO`.
    pub delta: f64,
    /// Instantaneous Rabi frequency `Omega_d d`.
    pub rabi: f64,
    pub omega_lo: f64,
    pub order: Order,
}

/// Coefficients of `H = (h_x sx + h_y sy + h_z sz) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCoefficients {
    pub h_x: f64,
    pub h_y: f64,
    pub h_z: f64,
}

impl PauliCoefficients {
    pub fn norm(&self) -> f64 {
        (self.h_x * self.h_x + self.h_y * self.h_y + self.h_z * self.h_z).sqrt()
    }

    fn matrix(&self) -> Mat2 {
        let half = 0.5;
        Mat2([
            [
                Complex64::new(half * self.h_z, 0.0),
                Complex64::new(half * self.h_x, -half * self.h_y),
            ],
            [
                Complex64::new(half * self.h_x, half * self.h_y),
                Complex64::new(-half * self.h_z, 0.0),
            ],
        ])
    }
}

pub fn h_eff(p: &EffectiveParams) -> PauliCoefficients {
    let mut h = PauliCoefficients {
        h_x: 0.0,
        h_y: p.rabi,
        h_z: -p.delta,
    };
    if p.order == Order::Rwa1 {
        h.h_z -= 0.75 * p.rabi * p.rabi / p.omega_lo;
        h.h_y -= p.rabi * p.delta / (2.0 * p.omega_lo);
    }
    h
}

/// Bloch-Siegert shifted resonance `1 + 0.75 (Omega_d d)^2` in units of `omega_q`.
pub fn shifted_resonance(drive_scale: f64, d: f64) -> f64 {
    let rabi = drive_scale * d;
    1.0 + 0.75 * rabi * rabi
}

/// Rabi frequency including the detuning correction, `Omega_d d (1 - delta / (2 omega_LO))`.
pub fn corrected_rabi(drive_scale: f64, d: f64, delta: f64, omega_lo: f64) -> f64 {
    drive_scale * d * (1.0 - delta / (2.0 * omega_lo))
}

/// Candidate stroboscopic sampling intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StroboscopicInterval {
    /// `1 / omega_LO`.
    InverseFrequency,
    /// `pi / omega_LO`, the period of the rotating-frame Hamiltonian.
    HalfPeriod,
    /// `2 pi / omega_LO`, the carrier period.
    FullPeriod,
}

impl StroboscopicInterval {
    pub const ALL: [StroboscopicInterval; 3] = [
        StroboscopicInterval::InverseFrequency,
        StroboscopicInterval::HalfPeriod,
        StroboscopicInterval::FullPeriod,
    ];

    pub fn length(self, omega_lo: f64) -> f64 {
        match self {
            StroboscopicInterval::InverseFrequency => 1.0 / omega_lo,
            StroboscopicInterval::HalfPeriod => PI / omega_lo,
            StroboscopicInterval::FullPeriod => 2.0 * PI / omega_lo,
        }
    }
}

/// RK4 steps per carrier period used by the time-ordered oracle.
pub const ORACLE_STEPS_PER_PERIOD: usize = 10_000;

/// Spectral-norm distance between the time-ordered rotating-frame
/// propagator over `n` intervals and `exp(-i H_eff n tau)`, for a constant
/// envelope value `d` and the carrier period reading of `tau`.
pub fn stroboscopic_check(drive_scale: f64, d: f64, delta: f64, n: usize, order: Order) -> f64 {
    stroboscopic_check_with(drive_scale, d, delta, n, order, StroboscopicInterval::FullPeriod)
}

pub fn stroboscopic_check_with(
    drive_scale: f64,
    d: f64,
    delta: f64,
    n: usize,
    order: Order,
    interval: StroboscopicInterval,
) -> f64 {
    let omega_lo = 1.0 - delta;
    let rabi = drive_scale * d;
    let total = n as f64 * interval.length(omega_lo);
    let exact = time_ordered_propagator(rabi, delta, omega_lo, total);
    let h = h_eff(&EffectiveParams {
        delta,
        rabi,
        omega_lo,
        order,
    });
    let approx = su2_exp(&h, total);
    exact.sub(&approx).spectral_norm()
}

/// Effective Hamiltonian of the exact stroboscopic propagator over
/// `n` intervals, `i log(U) / (n tau)`.
pub fn floquet_coefficients(
    drive_scale: f64,
    d: f64,
    delta: f64,
    n: usize,
    interval: StroboscopicInterval,
) -> PauliCoefficients {
    let omega_lo = 1.0 - delta;
    let total = n as f64 * interval.length(omega_lo);
    let u = time_ordered_propagator(drive_scale * d, delta, omega_lo, total);
    su2_log(&u, total)
}

fn rotating_frame_hamiltonian(rabi: f64, delta: f64, omega_lo: f64, t: f64) -> Mat2 {
    let phase = 2.0 * omega_lo * t;
    PauliCoefficients {
        h_x: rabi * phase.sin(),
        h_y: rabi * (1.0 - phase.cos()),
        h_z: -delta,
    }
    .matrix()
}

fn time_ordered_propagator(rabi: f64, delta: f64, omega_lo: f64, total: f64) -> Mat2 {
    let period = 2.0 * PI / omega_lo;
    let n_steps = ((total / period) * ORACLE_STEPS_PER_PERIOD as f64).ceil().max(1.0) as usize;
    let h = total / n_steps as f64;
    let minus_i = Complex64::new(0.0, -1.0);
    let rhs = |t: f64, u: &Mat2| rotating_frame_hamiltonian(rabi, delta, omega_lo, t).mul(u).scale(minus_i);
    let mut u = Mat2::identity();
    for k in 0..n_steps {
        let t = k as f64 * h;
        let k1 = rhs(t, &u);
        let k2 = rhs(t + 0.5 * h, &u.add(&k1.scale((0.5 * h).into())));
        let k3 = rhs(t + 0.5 * h, &u.add(&k2.scale((0.5 * h).into())));
        let k4 = rhs(t + h, &u.add(&k3.scale(h.into())));
        let incr = k1.add(&k2.scale(2.0.into())).add(&k3.scale(2.0.into())).add(&k4);
        u = u.add(&incr.scale((h / 6.0).into()));
    }
    u
}

/// `exp(-i (h . sigma / 2) t)`.
fn su2_exp(h: &PauliCoefficients, t: f64) -> Mat2 {
    let norm = h.norm();
    let angle = 0.5 * norm * t;
    let (s, c) = angle.sin_cos();
    if norm == 0.0 {
        return Mat2::identity();
    }
    let n = PauliCoefficients {
        h_x: h.h_x / norm,
        h_y: h.h_y / norm,
        h_z: h.h_z / norm,
    };
    // cos I - i sin (n . sigma)
    let ns = n.matrix().scale(2.0.into());
    Mat2::identity()
        .scale(c.into())
        .sub(&ns.scale(Complex64::new(0.0, s)))
}

/// Inverse of [`su2_exp`] on the principal branch.
fn su2_log(u: &Mat2, t: f64) -> PauliCoefficients {
    // U = cos(a) I - i sin(a) n.sigma, with a = |h| t / 2
    let m = &u.0;
    let cos_a = 0.5 * (m[0][0] + m[1][1]).re;
    let nz_sin = -0.5 * (m[0][0] - m[1][1]).im;
    let nx_sin = -0.5 * (m[0][1] + m[1][0]).im;
    let ny_sin = 0.5 * (m[1][0] - m[0][1]).re;
    let sin_a = (nx_sin * nx_sin + ny_sin * ny_sin + nz_sin * nz_sin).sqrt();
    let a = sin_a.atan2(cos_a);
    if sin_a == 0.0 {
        return PauliCoefficients {
            h_x: 0.0,
            h_y: 0.0,
            h_z: 0.0,
        };
    }
    let scale = 2.0 * a / (t * sin_a);
    PauliCoefficients {
        h_x: nx_sin * scale,
        h_y: ny_sin * scale,
        h_z: nz_sin * scale,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Mat2([[Complex64; 2]; 2]);

impl Mat2 {
    fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    fn add(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }

    fn sub(&self, o: &Mat2) -> Mat2 {
        self.add(&o.scale((-1.0).into()))
    }

    fn scale(&self, s: Complex64) -> Mat2 {
        let mut r = *self;
        for row in r.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        r
    }

    /// Largest singular value.
    fn spectral_norm(&self) -> f64 {
        let m = &self.0;
        let frob2: f64 = m.iter().flatten().map(|x| x.norm_sqr()).sum();
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).norm();
        // singular values s1, s2: s1^2 + s2^2 = frob2, s1 s2 = |det|
        let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
        (0.5 * (frob2 + disc)).sqrt()
    }
}
