//! Local stability of the eight homogeneous (corner) states.
//!
//! Stability is read off the eigenvalues of the Jacobian in the reduced
//! coordinates `(x1, x2, x3, y)`. The default linearisation uses
//! [`ReplicatorForm::Standard`]: under the literal `x (1 - x)` prefactor the
//! direction along the edge toward the dominant strategy has a zero
//! eigenvalue at every corner with `x1`, `x2`, `x3` or `y` equal to one, and
//! the edge dynamics there are `v' = (pi_4 - pi_k) v^2` (users) or
//! `u' = -(pi_C - pi_D) u^2` (creators). Those quadratic coefficients are
//! exactly the extra eigenvalues of the standard form, so the standard
//! linearisation gives the same verdicts without a centre-manifold step.
//! The literal Jacobian is still available and reports such corners as
//! [`Classification::NonHyperbolic`].

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::params::{CreatorStrategy, GameParams, UserStrategy};
use crate::payoff::{payoff_pair, PopulationState};
use crate::replicator::{rhs, ReplicatorForm};

/// Eigenvalues with real part inside `+-HYPERBOLIC_TOL` make a corner non-hyperbolic.
pub const HYPERBOLIC_TOL: f64 = 1e-9;

/// Central-difference step of [`jacobian`].
pub const FD_STEP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    Stable,
    Unstable,
    NonHyperbolic,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Stable => "Stable",
            Classification::Unstable => "Unstable",
            Classification::NonHyperbolic => "NonHyperbolic",
        }
    }

    pub fn from_eigenvalues(eigenvalues: &[Complex64]) -> Self {
        if eigenvalues.iter().any(|l| l.re > HYPERBOLIC_TOL) {
            Classification::Unstable
        } else if eigenvalues.iter().all(|l| l.re < -HYPERBOLIC_TOL) {
            Classification::Stable
        } else {
            Classification::NonHyperbolic
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumReport {
    pub user: UserStrategy,
    pub creator: CreatorStrategy,
    pub state: PopulationState,
    /// Sorted by real part, then imaginary part.
    pub eigenvalues: [Complex64; 4],
    pub classification: Classification,
    /// Whether the eigenvalue verdict agrees with the closed-form stability
    /// condition. Only present for `(AllD, D)` and `(AllC, C)`, and only when
    /// the corner is hyperbolic.
    pub closed_form_check: Option<bool>,
    pub form: ReplicatorForm,
}

/// Jacobian of the right-hand side in `(x1, x2, x3, y)` by central differences.
pub fn jacobian(s: &PopulationState, p: &GameParams, form: ReplicatorForm) -> Matrix4<f64> {
    let z = s.reduced();
    let mut j = Matrix4::zeros();
    for col in 0..4 {
        let mut plus = z;
        let mut minus = z;
        plus[col] += FD_STEP;
        minus[col] -= FD_STEP;
        let fp = rhs(form, &plus, p);
        let fm = rhs(form, &minus, p);
        for row in 0..4 {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * FD_STEP);
        }
    }
    j
}

/// Analytic Jacobian of the right-hand side in `(x1, x2, x3, y)`.
pub fn jacobian_closed_form(
    s: &PopulationState,
    p: &GameParams,
    form: ReplicatorForm,
) -> Matrix4<f64> {
    let y = s.y;
    let x = s.x;
    // User payoffs are affine in y: pi_i = y * safe_i + (1 - y) * unsafe_i.
    let mut pi = [0.0; 4];
    let mut slope = [0.0; 4];
    // Creator advantage pi_C - pi_D = sum_i x_i * gap_i.
    let mut gap = [0.0; 4];
    for u in UserStrategy::ALL {
        let safe = payoff_pair(CreatorStrategy::Safe, u, p);
        let unsafe_ = payoff_pair(CreatorStrategy::Unsafe, u, p);
        let i = u.index();
        pi[i] = y * safe.user_payoff + (1.0 - y) * unsafe_.user_payoff;
        slope[i] = safe.user_payoff - unsafe_.user_payoff;
        gap[i] = safe.creator_payoff - unsafe_.creator_payoff;
    }
    let mean: f64 = (0..4).map(|i| x[i] * pi[i]).sum();
    let mean_slope: f64 = (0..4).map(|i| x[i] * slope[i]).sum();
    let advantage: f64 = (0..4).map(|i| x[i] * gap[i]).sum();

    let mut j = Matrix4::zeros();
    for i in 0..3 {
        let g = form.gain(x[i]);
        for k in 0..3 {
            let mut v = -g * (pi[k] - pi[3]);
            if i == k {
                v += form.gain_slope(x[i]) * (pi[i] - mean);
            }
            j[(i, k)] = v;
        }
        j[(i, 3)] = g * (slope[i] - mean_slope);
    }
    let gy = form.gain(y);
    for k in 0..3 {
        j[(3, k)] = gy * (1.0 - y) * (gap[k] - gap[3]);
    }
    j[(3, 3)] = (form.gain_slope(y) * (1.0 - y) - gy) * advantage;
    j
}

/// Eigenvalues of a 4x4 real matrix, sorted by real then imaginary part.
pub fn eigenvalues(m: &Matrix4<f64>) -> [Complex64; 4] {
    let ev = m.complex_eigenvalues();
    let mut out = [ev[0], ev[1], ev[2], ev[3]];
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Closed-form stability condition for the two corners that have one:
/// `(AllD, D)` needs `c_c > 0, c_u > 0, c_i + c_u (1 - q) > 0`;
/// `(AllC, C)` needs `c_c < 0, b_u > 0, c_i + b_u (1 - q) > 0`.
pub fn closed_form_condition(
    user: UserStrategy,
    creator: CreatorStrategy,
    p: &GameParams,
) -> Option<bool> {
    match (user, creator) {
        (UserStrategy::AllD, CreatorStrategy::Unsafe) => {
            Some(p.c_c > 0.0 && p.c_u > 0.0 && p.c_i + p.c_u * (1.0 - p.q) > 0.0)
        }
        (UserStrategy::AllC, CreatorStrategy::Safe) => {
            Some(p.c_c < 0.0 && p.b_u > 0.0 && p.c_i + p.b_u * (1.0 - p.q) > 0.0)
        }
        _ => None,
    }
}

/// Stability report of one corner under the standard linearisation.
pub fn classify_corner(
    user: UserStrategy,
    creator: CreatorStrategy,
    p: &GameParams,
) -> EquilibriumReport {
    classify_corner_with(user, creator, p, ReplicatorForm::Standard)
}

pub fn classify_corner_with(
    user: UserStrategy,
    creator: CreatorStrategy,
    p: &GameParams,
    form: ReplicatorForm,
) -> EquilibriumReport {
    let state = PopulationState::corner(user, creator);
    let eigenvalues = eigenvalues(&jacobian(&state, p, form));
    let classification = Classification::from_eigenvalues(&eigenvalues);
    let closed_form_check = match classification {
        Classification::NonHyperbolic => None,
        c => closed_form_condition(user, creator, p).map(|holds| holds == (c == Classification::Stable)),
    };
    EquilibriumReport {
        user,
        creator,
        state,
        eigenvalues,
        classification,
        closed_form_check,
        form,
    }
}

/// All eight corners, user strategy major, creator strategy minor.
pub fn corner_census(p: &GameParams) -> Vec<EquilibriumReport> {
    corner_census_with(p, ReplicatorForm::Standard)
}

pub fn corner_census_with(p: &GameParams, form: ReplicatorForm) -> Vec<EquilibriumReport> {
    UserStrategy::ALL
        .iter()
        .flat_map(|&u| {
            CreatorStrategy::ALL
                .iter()
                .map(move |&c| classify_corner_with(u, c, p, form))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamName;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use CreatorStrategy::*;
    use UserStrategy::*;

    const FORMS: [ReplicatorForm; 2] = [ReplicatorForm::Literal, ReplicatorForm::Standard];

    fn real_parts(r: &EquilibriumReport) -> Vec<f64> {
        r.eigenvalues.iter().map(|l| l.re).collect()
    }

    fn assert_spectrum(r: &EquilibriumReport, mut want: Vec<f64>) {
        want.sort_by(f64::total_cmp);
        for (g, w) in real_parts(r).iter().zip(&want) {
            assert_abs_diff_eq!(*g, *w, epsilon = 1e-7);
        }
        assert!(r.eigenvalues.iter().all(|l| l.im.abs() < 1e-9));
    }

    #[test]
    fn defection_corner_spectrum() {
        let p = GameParams::default();
        let want_gmedia = -(p.c_i + (1.0 - p.q) * p.c_u);
        let r = classify_corner(AllD, Unsafe, &p);
        assert_spectrum(&r, vec![-p.c_u, -0.5 * p.c_u, want_gmedia, -p.c_c]);
        assert_eq!(r.classification, Classification::Stable);
        assert_eq!(r.closed_form_check, Some(true));

        let j = jacobian(&r.state, &p, ReplicatorForm::Literal);
        assert_abs_diff_eq!(j[(2, 2)], want_gmedia, epsilon = 1e-7);
        let lit = classify_corner_with(AllD, Unsafe, &p, ReplicatorForm::Literal);
        assert_spectrum(&lit, vec![0.0, -0.5 * p.c_u, want_gmedia, -p.c_c]);
        assert_eq!(lit.classification, Classification::NonHyperbolic);
        assert_eq!(lit.closed_form_check, None);
    }

    #[test]
    fn cooperation_corner() {
        let p = GameParams::default();
        let r = classify_corner(AllC, Safe, &p);
        assert_spectrum(
            &r,
            vec![-p.b_u, -0.5 * p.b_u, -(p.c_i + (1.0 - p.q) * p.b_u), p.c_c],
        );
        assert_eq!(r.classification, Classification::Unstable);
        assert_eq!(r.closed_form_check, Some(true));

        let p = GameParams::default().with(ParamName::CC, -0.05);
        let r = classify_corner(AllC, Safe, &p);
        assert_eq!(r.classification, Classification::Stable);
        assert_eq!(r.closed_form_check, Some(true));
    }

    #[test]
    fn census_at_defaults_has_one_stable_corner() {
        let reports = corner_census(&GameParams::default());
        assert_eq!(reports.len(), 8);
        let order: Vec<_> = reports.iter().map(|r| (r.user, r.creator)).collect();
        assert_eq!(order[0], (AllD, Unsafe));
        assert_eq!(order[1], (AllD, Safe));
        assert_eq!(order[7], (AllC, Safe));
        let stable: Vec<_> = reports
            .iter()
            .filter(|r| r.classification == Classification::Stable)
            .map(|r| (r.user, r.creator))
            .collect();
        assert_eq!(stable, vec![(AllD, Unsafe)]);
    }

    #[test]
    fn negative_safety_cost_flips_the_creator_direction() {
        // With c_c < 0 safe creation is cheaper, so the all-cooperate corner
        // becomes stable and the all-defect corner loses its creator direction.
        let p = GameParams::default().with(ParamName::CC, -0.05);
        let reports = corner_census(&p);
        let find = |u, c| reports.iter().find(|r| r.user == u && r.creator == c).unwrap();
        assert_eq!(find(AllC, Safe).classification, Classification::Stable);
        assert_eq!(find(AllD, Unsafe).classification, Classification::Unstable);
        assert_eq!(find(AllD, Unsafe).closed_form_check, Some(true));
    }

    #[test]
    fn media_corners_coincide_at_coin_flip_quality() {
        let p = GameParams {
            q: 0.5,
            c_i: 0.0,
            ..GameParams::default()
        };
        for form in FORMS {
            for c in CreatorStrategy::ALL {
                let b = classify_corner_with(BMedia, c, &p, form);
                let g = classify_corner_with(GMedia, c, &p, form);
                assert_eq!(b.classification, g.classification);
                for (lb, lg) in b.eigenvalues.iter().zip(&g.eigenvalues) {
                    assert_abs_diff_eq!(lb.re, lg.re, epsilon = 1e-7);
                }
            }
        }
    }

    #[test]
    fn eigenvalues_of_a_rotation_block() {
        let m = Matrix4::new(
            -1.0, 2.0, 0.0, 0.0, //
            -2.0, -1.0, 0.0, 0.0, //
            0.0, 0.0, 3.0, 0.0, //
            0.0, 0.0, 0.0, -4.0,
        );
        let ev = eigenvalues(&m);
        assert_abs_diff_eq!(ev[0].re, -4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1].re, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1].im, -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[2].im, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[3].re, 3.0, epsilon = 1e-12);
        assert_eq!(Classification::from_eigenvalues(&ev), Classification::Unstable);
    }

    #[test]
    fn zero_real_part_is_non_hyperbolic() {
        let ev = [Complex64::new(-1.0, 0.0), Complex64::new(1e-12, 0.0)];
        assert_eq!(Classification::from_eigenvalues(&ev), Classification::NonHyperbolic);
    }

    fn arb_params() -> impl Strategy<Value = GameParams> {
        (0.0..2.0, 0.0..2.0, 0.0..2.0, -1.0..1.0, 0.0..1.0, 0.0..=1.0).prop_map(
            |(b_u, c_u, b_c, c_c, c_i, q)| GameParams {
                b_u,
                c_u,
                b_c,
                c_c,
                c_i,
                q,
            },
        )
    }

    proptest! {
        #[test]
        fn finite_differences_match_closed_form(p in arb_params(), z in proptest::array::uniform4(0.0f64..1.0)) {
            let sum: f64 = z[..3].iter().sum::<f64>() + 0.1;
            let interior = PopulationState {
                x: [z[0] / sum, z[1] / sum, z[2] / sum, 0.1 / sum],
                y: z[3],
            };
            let mut states = vec![interior];
            for u in UserStrategy::ALL {
                for c in CreatorStrategy::ALL {
                    states.push(PopulationState::corner(u, c));
                }
            }
            for form in FORMS {
                for s in &states {
                    let fd = jacobian(s, &p, form);
                    let cf = jacobian_closed_form(s, &p, form);
                    prop_assert!((fd - cf).amax() < 1e-6, "{:?} {:?}\n{}\n{}", form, s, fd, cf);
                }
            }
        }

        #[test]
        fn defection_verdict_is_scale_invariant(p in arb_params(), k in 0.1f64..10.0) {
            let a = classify_corner(AllD, Unsafe, &p);
            let b = classify_corner(AllD, Unsafe, &p.scaled(k));
            if a.classification != Classification::NonHyperbolic
                && b.classification != Classification::NonHyperbolic
            {
                prop_assert_eq!(a.classification, b.classification);
            }
        }
    }
}
