use crate::corpus::SuccessLabel;
use crate::error::{Error, Result};

/// Continuity-corrected McNemar test on two classifiers' predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McNemarResult {
    /// Books A got right and B got wrong.
    pub b: usize,
    /// Books A got wrong and B got right.
    pub c: usize,
    pub statistic: f64,
    pub p_value: f64,
}

impl McNemarResult {
    pub fn to_csv(&self) -> String {
        format!(
            "b,c,statistic,p_value\n{},{},{},{}\n",
            self.b, self.c, self.statistic, self.p_value
        )
    }
}

pub fn mcnemar(
    preds_a: &[SuccessLabel],
    preds_b: &[SuccessLabel],
    golds: &[SuccessLabel],
) -> Result<McNemarResult> {
    for other in [preds_b.len(), golds.len()] {
        if other != preds_a.len() {
            return Err(Error::LengthMismatch {
                left: preds_a.len(),
                right: other,
            });
        }
    }
    let (mut b, mut c) = (0, 0);
    for ((pa, pb), g) in preds_a.iter().zip(preds_b).zip(golds) {
        match (pa == g, pb == g) {
            (true, false) => b += 1,
            (false, true) => c += 1,
            _ => {}
        }
    }
    let statistic = if b + c == 0 {
        0.0
    } else {
        let d = (b as f64 - c as f64).abs() - 1.0;
        d * d / (b + c) as f64
    };
    Ok(McNemarResult {
        b,
        c,
        statistic,
        p_value: chi_square_sf(statistic, 1.0),
    })
}

/// Survival function of the chi-square distribution with `dof` degrees of
/// freedom.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof / 2.0, x / 2.0)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized upper incomplete gamma Q(a, x).
fn gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_fraction(a, x)
    }
}

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 1000;

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_q_fraction(a: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use SuccessLabel::{Successful as S, Unsuccessful as U};

    /// Builds predictions with `b` A-only and `c` B-only correct books plus
    /// `both` books both classifiers get right.
    fn discordant(b: usize, c: usize, both: usize) -> [Vec<SuccessLabel>; 3] {
        let mut pa = Vec::new();
        let mut pb = Vec::new();
        let mut g = Vec::new();
        for _ in 0..b {
            pa.push(S);
            pb.push(U);
            g.push(S);
        }
        for _ in 0..c {
            pa.push(S);
            pb.push(U);
            g.push(U);
        }
        for _ in 0..both {
            pa.push(U);
            pb.push(U);
            g.push(U);
        }
        [pa, pb, g]
    }

    #[test]
    fn balanced_disagreement() {
        let [a, b, g] = discordant(10, 10, 5);
        let r = mcnemar(&a, &b, &g).unwrap();
        assert_eq!((r.b, r.c), (10, 10));
        assert!((r.statistic - 0.05).abs() < 1e-12);
        assert!((r.p_value - 0.8231).abs() < 1e-4);
    }

    #[test]
    fn lopsided_disagreement() {
        let [a, b, g] = discordant(15, 1, 0);
        let r = mcnemar(&a, &b, &g).unwrap();
        assert!((r.statistic - 10.5625).abs() < 1e-12);
        assert!((r.p_value - 0.00115).abs() < 1e-5);
    }

    #[test]
    fn identical_classifiers() {
        let [a, _, g] = discordant(3, 4, 2);
        let r = mcnemar(&a, &a, &g).unwrap();
        assert_eq!((r.b, r.c, r.statistic, r.p_value), (0, 0, 0.0, 1.0));
    }

    #[test]
    fn single_disagreement_is_literal() {
        let [a, b, g] = discordant(1, 0, 0);
        let r = mcnemar(&a, &b, &g).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            mcnemar(&[S], &[S, U], &[S]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(mcnemar(&[S], &[S], &[]).is_err());
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        assert!((ln_gamma(10.0) - 362_880f64.ln()).abs() < 1e-11);
    }

    proptest! {
        #[test]
        fn symmetric_in_classifiers(b in 0usize..40, c in 0usize..40, both in 0usize..10) {
            let [pa, pb, g] = discordant(b, c, both);
            let ab = mcnemar(&pa, &pb, &g).unwrap();
            let ba = mcnemar(&pb, &pa, &g).unwrap();
            prop_assert_eq!((ab.b, ab.c), (ba.c, ba.b));
            prop_assert_eq!(ab.statistic, ba.statistic);
            prop_assert_eq!(ab.p_value, ba.p_value);
        }

        #[test]
        fn sf_matches_reference(x in 1e-6f64..60.0, dof in 1u32..8) {
            let reference = 1.0 - ChiSquared::new(dof as f64).unwrap().cdf(x);
            let ours = chi_square_sf(x, dof as f64);
            prop_assert!((ours - reference).abs() < 1e-10, "{} vs {}", ours, reference);
        }
    }
}
