//! Dormand-Prince 5(4) with adaptive steps and fourth-order dense output,
//! on complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
/// Steps shorter than this fraction of the interval count as underflow.
const H_MIN_REL: f64 = 1e-12;
const MAX_STEPS: usize = 10_000_000;

/// Adaptive integrator settings. Per-step local error is held below `tol`
/// in the RMS norm with `atol = rtol = tol`.
#[derive(Clone, Copy, Debug)]
pub struct Dopri5 {
    pub tol: f64,
    /// Upper bound on the step size.
    pub h_max: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for OdeStats {
    fn add_assign(&mut self, rhs: Self) {
        self.accepted += rhs.accepted;
        self.rejected += rhs.rejected;
        self.evaluations += rhs.evaluations;
    }
}

/// Continuous extension over one accepted step.
struct Dense {
    t: f64,
    h: f64,
    r: [Vec<C>; 5],
}

impl Dense {
    fn eval(&self, t: f64, out: &mut [C]) {
        let th = (t - self.t) / self.h;
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.r;
        for i in 0..out.len() {
            out[i] = r1[i] + (r2[i] + (r3[i] + (r4[i] + r5[i] * th1) * th) * th1) * th;
        }
    }
}

impl Dopri5 {
    pub fn new(tol: f64, h_max: f64) -> Self {
        Self { tol, h_max }
    }

    fn error_norm(&self, y0: &[C], y1: &[C], err: &[C]) -> f64 {
        let sum: f64 = y0
            .iter()
            .zip(y1)
            .zip(err)
            .map(|((a, b), e)| {
                let sc = self.tol + self.tol * a.norm().max(b.norm());
                (e.norm() / sc).powi(2)
            })
            .sum();
        (sum / y0.len() as f64).sqrt()
    }

    fn initial_step<F>(&self, rhs: &mut F, t0: f64, y0: &[C], f0: &[C], span: f64) -> Result<f64>
    where
        F: FnMut(f64, &[C], &mut [C]) -> Result<()>,
    {
        let n = y0.len() as f64;
        let scaled = |v: &[C]| -> f64 {
            (v.iter()
                .zip(y0)
                .map(|(x, y)| (x.norm() / (self.tol + self.tol * y.norm())).powi(2))
                .sum::<f64>()
                / n)
                .sqrt()
        };
        let d0 = scaled(y0);
        let d1 = scaled(f0);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        h0 = h0.min(self.h_max).min(span);
        let y1: Vec<C> = y0.iter().zip(f0).map(|(y, f)| y + f * h0).collect();
        let mut f1 = vec![C::new(0.0, 0.0); y0.len()];
        rhs(t0 + h0, &y1, &mut f1)?;
        let diff: Vec<C> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = scaled(&diff) / h0;
        let big = d1.max(d2);
        let h1 = if big <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / big).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(self.h_max).min(span))
    }

    /// Integrates `y' = rhs(t, y)` from `t0` to `t1` in place.
    ///
    /// `on_accept(t, y)` runs after every accepted step and may abort the
    /// integration. For every `t` in `outputs` lying in `(t0, t1]`,
    /// `on_output(index, t, y(t))` is called in order using the dense
    /// interpolant. Returns the statistics and the last step size tried.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate<F, A, O>(
        &self,
        mut rhs: F,
        t0: f64,
        t1: f64,
        y: &mut [C],
        h_start: Option<f64>,
        outputs: &[f64],
        mut on_accept: A,
        mut on_output: O,
    ) -> Result<(OdeStats, f64)>
    where
        F: FnMut(f64, &[C], &mut [C]) -> Result<()>,
        A: FnMut(f64, &[C]) -> Result<()>,
        O: FnMut(usize, f64, &[C]) -> Result<()>,
    {
        let n = y.len();
        let span = t1 - t0;
        let mut stats = OdeStats::default();
        let mut next_out = outputs.partition_point(|&t| t <= t0);
        if span <= 0.0 {
            return Ok((stats, h_start.unwrap_or(0.0)));
        }
        let zero = C::new(0.0, 0.0);
        let mut k: [Vec<C>; 7] = std::array::from_fn(|_| vec![zero; n]);
        let mut ytmp = vec![zero; n];
        let mut y1 = vec![zero; n];
        let mut err = vec![zero; n];
        let mut sample = vec![zero; n];
        let mut dense = Dense {
            t: t0,
            h: 1.0,
            r: std::array::from_fn(|_| vec![zero; n]),
        };

        let mut t = t0;
        rhs(t, y, &mut k[0])?;
        stats.evaluations += 1;
        let mut h = match h_start {
            Some(h) if h > 0.0 => h.min(self.h_max).min(span),
            _ => {
                stats.evaluations += 1;
                self.initial_step(&mut rhs, t0, y, &k[0], span)?
            }
        };
        let h_min = H_MIN_REL * span;
        let mut just_rejected = false;

        for _ in 0..MAX_STEPS {
            let last = t + h >= t1 - 1e-14 * span.abs();
            if last {
                h = t1 - t;
            }
            macro_rules! stage {
                ($dst:expr, $tc:expr, [$($coef:expr => $src:expr),*]) => {{
                    for i in 0..n {
                        ytmp[i] = y[i] $(+ k[$src][i] * (h * $coef))*;
                    }
                    rhs(t + $tc * h, &ytmp, &mut k[$dst])?;
                }};
            }
            stage!(1, C2, [A21 => 0]);
            stage!(2, C3, [A31 => 0, A32 => 1]);
            stage!(3, C4, [A41 => 0, A42 => 1, A43 => 2]);
            stage!(4, C5, [A51 => 0, A52 => 1, A53 => 2, A54 => 3]);
            stage!(5, 1.0, [A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4]);
            for i in 0..n {
                y1[i] = y[i]
                    + (k[0][i] * A71 + k[2][i] * A73 + k[3][i] * A74 + k[4][i] * A75 + k[5][i] * A76) * h;
            }
            rhs(t + h, &y1, &mut k[6])?;
            stats.evaluations += 6;
            for i in 0..n {
                err[i] = (k[0][i] * E1
                    + k[2][i] * E3
                    + k[3][i] * E4
                    + k[4][i] * E5
                    + k[5][i] * E6
                    + k[6][i] * E7)
                    * h;
            }
            let e = self.error_norm(y, &y1, &err);
            if !e.is_finite() {
                return Err(Error::StepSizeUnderflow { t, h });
            }

            if e <= 1.0 {
                stats.accepted += 1;
                let t_new = if last { t1 } else { t + h };
                if next_out < outputs.len() && outputs[next_out] <= t_new {
                    dense.t = t;
                    dense.h = h;
                    let [r1, r2, r3, r4, r5] = &mut dense.r;
                    for i in 0..n {
                        let dy = y1[i] - y[i];
                        let bspl = k[0][i] * h - dy;
                        r1[i] = y[i];
                        r2[i] = dy;
                        r3[i] = bspl;
                        r4[i] = dy - k[6][i] * h - bspl;
                        r5[i] = (k[0][i] * D1
                            + k[2][i] * D3
                            + k[3][i] * D4
                            + k[4][i] * D5
                            + k[5][i] * D6
                            + k[6][i] * D7)
                            * h;
                    }
                    while next_out < outputs.len() && outputs[next_out] <= t_new {
                        let to = outputs[next_out];
                        if to >= t_new {
                            on_output(next_out, to, &y1)?;
                        } else {
                            dense.eval(to, &mut sample);
                            on_output(next_out, to, &sample)?;
                        }
                        next_out += 1;
                    }
                }
                y.copy_from_slice(&y1);
                k.swap(0, 6);
                t = t_new;
                on_accept(t, y)?;
                if last {
                    return Ok((stats, h));
                }
                let mut fac = (SAFETY * e.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
                if just_rejected {
                    fac = fac.min(1.0);
                }
                just_rejected = false;
                h = (h * fac).min(self.h_max);
            } else {
                stats.rejected += 1;
                just_rejected = true;
                h *= (SAFETY * e.powf(-0.2)).clamp(FAC_MIN, 1.0);
                if h < h_min {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
        Err(Error::StepSizeUnderflow { t, h })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn exponential_decay_and_rotation() {
        let lam = C::new(-0.3, 2.0);
        let ode = Dopri5::new(1e-10, f64::INFINITY);
        let mut y = vec![c(1.0)];
        let outs: Vec<f64> = (0..=50).map(|k| 0.1 * k as f64).collect();
        let mut worst: f64 = 0.0;
        let (stats, _) = ode
            .integrate(
                |_, y, dy| {
                    dy[0] = lam * y[0];
                    Ok(())
                },
                0.0,
                5.0,
                &mut y,
                None,
                &outs,
                |_, _| Ok(()),
                |_, t, v| {
                    worst = worst.max((v[0] - (lam * t).exp()).norm());
                    Ok(())
                },
            )
            .unwrap();
        assert!((y[0] - (lam * 5.0).exp()).norm() < 1e-8);
        assert!(worst < 1e-8, "dense output error {worst}");
        assert!(stats.accepted > 10);
    }

    #[test]
    fn fifth_order_convergence() {
        let run = |tol: f64| {
            let mut y = vec![c(1.0), c(0.0)];
            Dopri5::new(tol, f64::INFINITY)
                .integrate(
                    |_, y, dy| {
                        dy[0] = y[1];
                        dy[1] = -y[0];
                        Ok(())
                    },
                    0.0,
                    10.0,
                    &mut y,
                    None,
                    &[],
                    |_, _| Ok(()),
                    |_, _, _| Ok(()),
                )
                .unwrap();
            (y[0] - c(10f64.cos())).norm()
        };
        let (a, b) = (run(1e-6), run(1e-9));
        assert!(b < a / 50.0, "{a} {b}");
    }

    #[test]
    fn respects_step_limit_and_reports_underflow() {
        let mut y = vec![c(1.0)];
        let (stats, _) = Dopri5::new(1e-6, 0.01)
            .integrate(|_, _, dy| { dy[0] = c(0.0); Ok(()) }, 0.0, 1.0, &mut y, None, &[], |_, _| Ok(()), |_, _, _| Ok(()))
            .unwrap();
        assert!(stats.accepted >= 100);
        let mut y = vec![c(1.0)];
        let r = Dopri5::new(1e-6, f64::INFINITY).integrate(
            |_, y, dy| {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            0.0,
            2.0,
            &mut y,
            None,
            &[],
            |_, _| Ok(()),
            |_, _, _| Ok(()),
        );
        assert!(matches!(r, Err(Error::StepSizeUnderflow { .. })));
    }

    #[test]
    fn outputs_hit_endpoint_exactly() {
        let mut seen = Vec::new();
        let mut y = vec![c(2.0)];
        Dopri5::new(1e-8, f64::INFINITY)
            .integrate(
                |_, y, dy| {
                    dy[0] = -y[0];
                    Ok(())
                },
                0.0,
                1.0,
                &mut y,
                None,
                &[0.0, 0.5, 1.0],
                |_, _| Ok(()),
                |i, t, v| {
                    seen.push((i, t, v[0]));
                    Ok(())
                },
            )
            .unwrap();
        assert_eq!(seen.len(), 2);
        assert_eq!(seen[1].2, y[0]);
        assert!((seen[0].2 - c(2.0 * (-0.5f64).exp())).norm() < 1e-8);
    }
}
