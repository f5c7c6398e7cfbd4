use super::{CsrMatrix, Preconditioner, SolverConfig};
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    /// `||A x - b||_2`, recomputed from the returned solution.
    pub residual: f64,
    /// Residual norm after each iteration (entry 0 is the initial residual).
    /// For CG this is the smoothed residual and is nonincreasing.
    pub history: Vec<f64>,
}

fn inverse_diagonal(a: &CsrMatrix, pc: Preconditioner) -> Option<Vec<f64>> {
    match pc {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(
            a.diagonal()
                .into_iter()
                .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                .collect(),
        ),
    }
}

fn apply_pc(dinv: &Option<Vec<f64>>, r: &[f64], z: &mut [f64]) {
    match dinv {
        None => z.copy_from_slice(r),
        Some(d) => par::fill_indexed(z, |i| d[i] * r[i]),
    }
}

fn true_residual(a: &CsrMatrix, x: &[f64], b: &[f64], scratch: &mut [f64]) -> f64 {
    a.spmv(x, scratch);
    par::sum_indexed(b.len(), |i| {
        let d = b[i] - scratch[i];
        d * d
    })
    .sqrt()
}

fn check_dims(a: &CsrMatrix, rhs: &[f64], x0: &[f64]) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    for len in [rhs.len(), x0.len()] {
        if len != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: len,
            });
        }
    }
    Ok(())
}

/// Preconditioned conjugate gradients for symmetric positive definite systems.
pub fn cg_solve(a: &CsrMatrix, rhs: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome> {
    cg_solve_from(a, rhs, &vec![0.0; rhs.len()], cfg)
}

pub fn cg_solve_from(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_dims(a, rhs, x0)?;
    let n = rhs.len();
    let target = (cfg.rel_tol * par::norm2(rhs)).max(cfg.abs_tol);
    let dinv = inverse_diagonal(a, cfg.preconditioner);

    let dinv = dinv.unwrap_or_else(|| vec![1.0; n]);

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut res = true_residual(a, &x, rhs, &mut r);
    par::map_inplace(&mut r, |i, ax| rhs[i] - ax);
    let mut history = vec![res];
    if res <= target {
        return Ok(SolveOutcome {
            solution: x,
            iterations: 0,
            residual: res,
            history,
        });
    }

    // Minimal-residual smoothing: (y, s) is the combination of past iterates
    // with the smallest residual, so the reported norm never grows.
    let mut y = x.clone();
    let mut s = r.clone();
    let mut p = vec![0.0; n];
    let mut ap = vec![0.0; n];
    par::fill_indexed(&mut p, |i| dinv[i] * r[i]);
    let mut rz = par::sum_indexed(n, |i| r[i] * dinv[i] * r[i]);

    for it in 1..=cfg.max_iter {
        let curvature = a.spmv_dot(&p, &mut ap);
        if curvature <= 0.0 || !curvature.is_finite() {
            return Err(Error::IndefiniteBreakdown {
                iteration: it,
                curvature,
            });
        }
        let alpha = rz / curvature;
        let (pv, apv, sv, dv) = (&p, &ap, &s, &dinv);
        let [rz_new, dd, sd] = par::chunked_mut([&mut x, &mut r], |off, [xs, rs]| {
            let mut acc = [0.0; 3];
            for i in 0..xs.len() {
                let g = off + i;
                xs[i] += alpha * pv[g];
                rs[i] -= alpha * apv[g];
                let ri = rs[i];
                acc[0] += ri * dv[g] * ri;
                let di = ri - sv[g];
                acc[1] += di * di;
                acc[2] += sv[g] * di;
            }
            acc
        });
        let eta = if dd > 0.0 { -sd / dd } else { 0.0 };
        let beta = rz_new / rz;
        rz = rz_new;
        let (xv, rv) = (&x, &r);
        let [ss] = par::chunked_mut([&mut s, &mut y, &mut p], |off, [ss, ys, ps]| {
            let mut acc = 0.0;
            for i in 0..ss.len() {
                let g = off + i;
                ss[i] += eta * (rv[g] - ss[i]);
                ys[i] += eta * (xv[g] - ys[i]);
                ps[i] = dv[g] * rv[g] + beta * ps[i];
                acc += ss[i] * ss[i];
            }
            [acc]
        });
        res = ss.sqrt();
        history.push(res);
        if res <= target {
            // Confirm against the true residual; restart the recurrence if it drifted.
            let mut scratch = vec![0.0; n];
            let actual = true_residual(a, &y, rhs, &mut scratch);
            if actual <= target {
                return Ok(SolveOutcome {
                    solution: y,
                    iterations: it,
                    residual: actual,
                    history,
                });
            }
            x.copy_from_slice(&y);
            par::fill_indexed(&mut r, |i| rhs[i] - scratch[i]);
            s.copy_from_slice(&r);
            par::fill_indexed(&mut p, |i| dinv[i] * r[i]);
            rz = par::sum_indexed(n, |i| r[i] * dinv[i] * r[i]);
        }
    }
    let mut scratch = vec![0.0; n];
    Err(Error::MaxIterExceeded {
        iterations: cfg.max_iter,
        residual: true_residual(a, &y, rhs, &mut scratch),
    })
}

/// Jacobi-preconditioned BiCGStab for general nonsingular systems.
pub fn bicgstab_solve(a: &CsrMatrix, rhs: &[f64], cfg: &SolverConfig) -> Result<SolveOutcome> {
    bicgstab_solve_from(a, rhs, &vec![0.0; rhs.len()], cfg)
}

pub fn bicgstab_solve_from(
    a: &CsrMatrix,
    rhs: &[f64],
    x0: &[f64],
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    check_dims(a, rhs, x0)?;
    let n = rhs.len();
    let target = (cfg.rel_tol * par::norm2(rhs)).max(cfg.abs_tol);
    let dinv = inverse_diagonal(a, cfg.preconditioner);

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut res = true_residual(a, &x, rhs, &mut r);
    par::map_inplace(&mut r, |i, ax| rhs[i] - ax);
    let mut history = vec![res];
    if res <= target {
        return Ok(SolveOutcome {
            solution: x,
            iterations: 0,
            residual: res,
            history,
        });
    }

    let mut r_hat = r.clone();
    let mut rho = 1.0;
    let mut alpha = 1.0;
    let mut omega = 1.0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut best = res;
    let mut since_best = 0usize;
    let stall_window = 200.max(cfg.max_iter / 20);

    for it in 1..=cfg.max_iter {
        let rho_new = par::dot(&r_hat, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            // Lost bi-orthogonality: restart from the current residual.
            let actual = true_residual(a, &x, rhs, &mut scratch);
            if actual <= target {
                return Ok(SolveOutcome {
                    solution: x,
                    iterations: it,
                    residual: actual,
                    history,
                });
            }
            return Err(Error::Stagnation {
                iteration: it,
                residual: actual,
            });
        }
        if it == 1 {
            p.copy_from_slice(&r);
        } else {
            let beta = (rho_new / rho) * (alpha / omega);
            par::map_inplace(&mut p, |i, pi| r[i] + beta * (pi - omega * v[i]));
        }
        rho = rho_new;
        apply_pc(&dinv, &p, &mut y);
        a.spmv(&y, &mut v);
        let denom = par::dot(&r_hat, &v);
        if denom == 0.0 || !denom.is_finite() {
            return Err(Error::Stagnation {
                iteration: it,
                residual: res,
            });
        }
        alpha = rho / denom;
        par::fill_indexed(&mut s, |i| r[i] - alpha * v[i]);
        let s_norm = par::norm2(&s);
        if s_norm <= target {
            par::axpy(alpha, &y, &mut x);
            let actual = true_residual(a, &x, rhs, &mut scratch);
            history.push(s_norm);
            if actual <= target {
                return Ok(SolveOutcome {
                    solution: x,
                    iterations: it,
                    residual: actual,
                    history,
                });
            }
            par::fill_indexed(&mut r, |i| rhs[i] - scratch[i]);
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        apply_pc(&dinv, &s, &mut z);
        a.spmv(&z, &mut t);
        let tt = par::dot(&t, &t);
        if tt == 0.0 {
            return Err(Error::Stagnation {
                iteration: it,
                residual: s_norm,
            });
        }
        omega = par::dot(&t, &s) / tt;
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::Stagnation {
                iteration: it,
                residual: s_norm,
            });
        }
        par::axpy(alpha, &y, &mut x);
        par::axpy(omega, &z, &mut x);
        par::fill_indexed(&mut r, |i| s[i] - omega * t[i]);
        res = par::norm2(&r);
        history.push(res);
        if res <= target {
            let actual = true_residual(a, &x, rhs, &mut scratch);
            if actual <= target {
                return Ok(SolveOutcome {
                    solution: x,
                    iterations: it,
                    residual: actual,
                    history,
                });
            }
            par::fill_indexed(&mut r, |i| rhs[i] - scratch[i]);
            r_hat.copy_from_slice(&r);
            rho = 1.0;
            alpha = 1.0;
            omega = 1.0;
            v.iter_mut().for_each(|e| *e = 0.0);
            p.iter_mut().for_each(|e| *e = 0.0);
            continue;
        }
        if res < best {
            best = res;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > stall_window {
                return Err(Error::Stagnation {
                    iteration: it,
                    residual: res,
                });
            }
        }
    }
    Err(Error::MaxIterExceeded {
        iterations: cfg.max_iter,
        residual: true_residual(a, &x, rhs, &mut scratch),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poisson_1d(n: usize) -> CsrMatrix {
        CsrMatrix::from_row_fn(n, n, |r, e| {
            e.push((r, 2.0));
            if r > 0 {
                e.push((r - 1, -1.0));
            }
            if r + 1 < n {
                e.push((r + 1, -1.0));
            }
        })
        .unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn cg_identity_one_iteration() {
        let out = cg_solve(&CsrMatrix::identity(4), &[1.0, 0.0, 0.0, 0.0], &cfg()).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn cg_three_point_poisson() {
        // [[2,-1,0],[-1,2,-1],[0,-1,2]] x = 1  ->  x = (3/2, 2, 3/2)
        let out = cg_solve(&poisson_1d(3), &[1.0; 3], &cfg()).unwrap();
        for (x, e) in out.solution.iter().zip([1.5, 2.0, 1.5]) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rhs_returns_zero_without_iterating() {
        let a = poisson_1d(5);
        let out = cg_solve(&a, &[0.0; 5], &cfg()).unwrap();
        assert_eq!((out.iterations, out.solution), (0, vec![0.0; 5]));
        let out = bicgstab_solve(&a, &[0.0; 5], &cfg()).unwrap();
        assert_eq!(out.solution, vec![0.0; 5]);
    }

    #[test]
    fn cg_detects_indefinite_matrix() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        let err = cg_solve(&a, &[0.0, 1.0], &SolverConfig { preconditioner: Preconditioner::None, ..cfg() });
        assert!(matches!(err, Err(Error::IndefiniteBreakdown { .. })));
    }

    #[test]
    fn cg_reports_max_iter() {
        let a = poisson_1d(50);
        let c = SolverConfig { max_iter: 3, ..cfg() };
        assert!(matches!(cg_solve(&a, &[1.0; 50], &c), Err(Error::MaxIterExceeded { .. })));
    }

    #[test]
    fn bicgstab_upper_bidiagonal() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        let out = bicgstab_solve(&a, &[2.0, 1.0], &cfg()).unwrap();
        assert!((out.solution[0] - 1.0).abs() < 1e-12);
        assert!((out.solution[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bicgstab_agrees_with_cg_on_spd() {
        let a = poisson_1d(40);
        let b: Vec<f64> = (0..40).map(|i| ((i * 7) % 11) as f64 - 5.0).collect();
        let c = SolverConfig { rel_tol: 1e-10, ..cfg() };
        let x1 = cg_solve(&a, &b, &c).unwrap().solution;
        let x2 = bicgstab_solve(&a, &b, &c).unwrap().solution;
        let scale = x1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn reported_residual_is_true_residual() {
        let a = poisson_1d(30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        for out in [cg_solve(&a, &b, &cfg()).unwrap(), bicgstab_solve(&a, &b, &cfg()).unwrap()] {
            let ax = a.mul_vec(&out.solution);
            let r: f64 = ax.iter().zip(&b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
            assert!((r - out.residual).abs() <= 1e-13 * r.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn cg_residual_history_nonincreasing() {
        let a = poisson_1d(64);
        let b: Vec<f64> = (0..64).map(|i| ((i as f64 + 0.5) * std::f64::consts::PI / 64.0).sin()).collect();
        let out = cg_solve(&a, &b, &cfg()).unwrap();
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12), "{:?}", w);
        }
    }
}
