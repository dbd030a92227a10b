use approx::assert_abs_diff_eq;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use rfcoh::emitter::{saturation_p1, SaturationModel};
use rfcoh::fock::{Mode, ModeSpec, ModeState};

const N_MAX: usize = 3;

/// Two-mode state with total photon number at most `N_MAX`, so that any
/// splitter keeps it inside the truncation.
fn bounded_two_mode(raw: Vec<(f64, f64)>) -> ModeState {
    let spec = ModeSpec::new(vec![Mode::photon("a", N_MAX), Mode::photon("b", N_MAX)]).unwrap();
    let mut v = vec![C64::new(0.0, 0.0); spec.dim()];
    let mut it = raw.into_iter();
    for na in 0..=N_MAX {
        for nb in 0..=(N_MAX - na) {
            let (re, im) = it.next().unwrap();
            v[spec.index(&[na, nb]).unwrap()] = C64::new(re, im);
        }
    }
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    ModeState::new(spec, v).unwrap()
}

fn amps() -> impl Strategy<Value = Vec<(f64, f64)>> {
    // (N_MAX+1)(N_MAX+2)/2 basis states with n_a + n_b <= N_MAX
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 10)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
}

fn single_mode(label: &str, raw: &[(f64, f64)]) -> ModeState {
    let spec = ModeSpec::new(vec![Mode::photon(label, raw.len() - 1)]).unwrap();
    let mut v: Vec<C64> = raw.iter().map(|&(a, b)| C64::new(a, b)).collect();
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= n);
    ModeState::new(spec, v).unwrap()
}

fn small_mode() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 2..4)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splitter_is_unitary(raw in amps(), t in 0.0..=1.0f64, theta in 0.0..6.3f64) {
        let s = bounded_two_mode(raw);
        let out = s.apply_beam_splitter("a", "b", t, theta).unwrap();
        assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
        // overlaps are preserved as well
        let other = s.apply_phase("a", 0.7).unwrap();
        let out2 = other.apply_beam_splitter("a", "b", t, theta).unwrap();
        let before: C64 = s.amplitudes().iter().zip(other.amplitudes()).map(|(x, y)| x.conj() * y).sum();
        let after: C64 = out.amplitudes().iter().zip(out2.amplitudes()).map(|(x, y)| x.conj() * y).sum();
        prop_assert!((before - after).norm() < 1e-12);
    }

    #[test]
    fn splitter_conserves_photon_number(raw in amps(), t in 0.0..=1.0f64, theta in 0.0..6.3f64) {
        let s = bounded_two_mode(raw);
        let n = |x: &ModeState| {
            x.correlator(&["a"], &["a"]).unwrap().re + x.correlator(&["b"], &["b"]).unwrap().re
        };
        let out = s.apply_beam_splitter("a", "b", t, theta).unwrap();
        prop_assert!((n(&s) - n(&out)).abs() < 1e-12);
        // photon-number distribution of the total is unchanged too
        let total = |x: &ModeState| {
            let mut p = [0.0; N_MAX + 1];
            for (i, z) in x.amplitudes().iter().enumerate() {
                let d = x.spec().digits(i);
                if d[0] + d[1] <= N_MAX {
                    p[d[0] + d[1]] += z.norm_sqr();
                }
            }
            p
        };
        let (pa, pb) = (total(&s), total(&out));
        for k in 0..=N_MAX {
            prop_assert!((pa[k] - pb[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_keeps_normalized_correlations(raw in small_mode(), eta in 0.05..1.0f64) {
        let s = single_mode("a", &raw);
        let n = s.correlator(&["a"], &["a"]).unwrap().re;
        prop_assume!(n > 1e-3);
        let lossy = s.apply_loss("a", eta).unwrap();
        assert_abs_diff_eq!(lossy.trace(), 1.0, epsilon = 1e-12);
        let nl = lossy.correlator(&["a"], &["a"]).unwrap().re;
        assert_abs_diff_eq!(nl, eta * n, epsilon = 1e-12);
        let g2 = s.correlator(&["a", "a"], &["a", "a"]).unwrap().re / (n * n);
        let g2l = lossy.correlator(&["a", "a"], &["a", "a"]).unwrap().re / (nl * nl);
        prop_assert!((g2 - g2l).abs() < 1e-10);
        prop_assert!(lossy.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn kronecker_is_associative(a in small_mode(), b in small_mode(), c in small_mode()) {
        let (a, b, c) = (single_mode("a", &a), single_mode("b", &b), single_mode("c", &c));
        let left = a.tensor_with(&b).unwrap().tensor_with(&c).unwrap();
        let right = a.tensor_with(&b.tensor_with(&c).unwrap()).unwrap();
        let flat = ModeState::tensor(&[&a, &b, &c]).unwrap();
        prop_assert_eq!(left.spec(), right.spec());
        for ((x, y), z) in left.amplitudes().iter().zip(right.amplitudes()).zip(flat.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-15 && (x - z).norm() < 1e-15);
        }
    }

    #[test]
    fn partial_trace_of_product_recovers_factor(a in small_mode(), b in small_mode()) {
        let (sa, sb) = (single_mode("a", &a), single_mode("b", &b));
        let r = sa.tensor_with(&sb).unwrap().partial_trace(&["a"]).unwrap();
        let direct = sa.to_density();
        for (x, y) in r.matrix().iter().zip(direct.matrix().iter()) {
            prop_assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn saturation_is_monotone_and_bounded(eta in 0.01..1.0f64, n in 0.0..1e3f64, dn in 1e-9..10.0f64) {
        let (lo, hi) = (saturation_p1(n, eta).unwrap(), saturation_p1(n + dn, eta).unwrap());
        prop_assert!(lo < hi);
        prop_assert!((0.0..1.0).contains(&lo) && hi < 1.0);
        let model = SaturationModel::from_eta_ab(eta).unwrap();
        prop_assert!((model.nbar(lo).unwrap() - n).abs() <= 1e-9 * (1.0 + n));
    }
}
