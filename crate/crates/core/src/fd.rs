//! Central finite differences up to second order, with optional one-step
//! Richardson extrapolation (`(4 D(h/2) - D(h)) / 3`).

use crate::error::Result;

/// Derivative of `f` at `point` along the multi-index `vars` (length 0, 1 or
/// 2; e.g. `[0, 1]` is the mixed second derivative). `steps[i]` is the step
/// used for coordinate `i`.
pub fn derivative<F>(f: &F, point: &[f64], vars: &[usize], steps: &[f64], richardson: bool) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + ?Sized,
{
    let coarse = central(f, point, vars, steps)?;
    if !richardson || vars.is_empty() {
        return Ok(coarse);
    }
    let half: Vec<f64> = steps.iter().map(|h| h / 2.0).collect();
    let fine = central(f, point, vars, &half)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn shifted(point: &[f64], moves: &[(usize, f64)]) -> Vec<f64> {
    let mut p = point.to_vec();
    for &(i, d) in moves {
        p[i] += d;
    }
    p
}

fn central<F>(f: &F, point: &[f64], vars: &[usize], steps: &[f64]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + ?Sized,
{
    match *vars {
        [] => f(point),
        [i] => {
            let h = steps[i];
            let fp = f(&shifted(point, &[(i, h)]))?;
            let fm = f(&shifted(point, &[(i, -h)]))?;
            Ok((fp - fm) / (2.0 * h))
        }
        [i, j] if i == j => {
            let h = steps[i];
            let fp = f(&shifted(point, &[(i, h)]))?;
            let f0 = f(point)?;
            let fm = f(&shifted(point, &[(i, -h)]))?;
            Ok((fp - 2.0 * f0 + fm) / (h * h))
        }
        [i, j] => {
            let (hi, hj) = (steps[i], steps[j]);
            let fpp = f(&shifted(point, &[(i, hi), (j, hj)]))?;
            let fpm = f(&shifted(point, &[(i, hi), (j, -hj)]))?;
            let fmp = f(&shifted(point, &[(i, -hi), (j, hj)]))?;
            let fmm = f(&shifted(point, &[(i, -hi), (j, -hj)]))?;
            Ok((fpp - fpm - fmp + fmm) / (4.0 * hi * hj))
        }
        _ => panic!("finite differences are implemented up to second order"),
    }
}

/// Steps `h * max(1, |x_i|)` per coordinate.
pub fn relative_steps(point: &[f64], h: f64) -> Vec<f64> {
    point.iter().map(|x| h * x.abs().max(1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_quadratics_and_accurate_on_smooth_functions() {
        let f = |p: &[f64]| -> Result<f64> { Ok(3.0 * p[0] * p[0] + 2.0 * p[0] * p[1] - p[1]) };
        let pt = [0.7, -1.3];
        let h = [1e-3, 1e-3];
        assert!((derivative(&f, &pt, &[0], &h, false).unwrap() - (6.0 * 0.7 - 2.6)).abs() < 1e-9);
        assert!((derivative(&f, &pt, &[0, 0], &h, false).unwrap() - 6.0).abs() < 1e-6);
        assert!((derivative(&f, &pt, &[0, 1], &h, false).unwrap() - 2.0).abs() < 1e-6);

        let g = |p: &[f64]| -> Result<f64> { Ok((p[0] * p[1]).sin()) };
        let exact = -(0.35f64).sin() * 0.5 * 0.7 + (0.35f64).cos();
        let plain = derivative(&g, &[0.7, 0.5], &[0, 1], &[1e-2, 1e-2], false).unwrap();
        let rich = derivative(&g, &[0.7, 0.5], &[0, 1], &[1e-2, 1e-2], true).unwrap();
        assert!((rich - exact).abs() < (plain - exact).abs() / 100.0);
    }
}
