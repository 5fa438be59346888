mod common;

use common::*;
use petz_lab::entropy::{
    alpha_z_renyi, measured_relative_entropy, p_fidelity, p_fidelity_normalized, relative_entropy, RenyiDomain,
};
use petz_lab::linalg::{c, kron, trace, ComplexMatrix, PsdMatrix};
use petz_lab::quadrature::QuadratureRule;
use petz_lab::recovery::{FidelityOfRecovery, InterpolantContext, RecoveryContext};
use petz_lab::states::{
    ginibre, haar_isometry, haar_unitary, make_channel, partial_trace, ChannelKind, DensityMatrix, QuantumChannel,
    StinespringIsometry, Subsystem,
};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(48)
}

fn conjugate(v: &ComplexMatrix, rho: &DensityMatrix) -> DensityMatrix {
    DensityMatrix::normalized(&(v * rho.matrix() * v.adjoint())).unwrap()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn choi_round_trip(seed in any::<u64>(), d_in in 2usize..=3, d_out in 2usize..=4) {
        let mut g = rng(seed);
        let ch = channel(d_in, d_out, &mut g);
        let back = QuantumChannel::from_choi(&ch.choi(), d_in, d_out).unwrap();
        prop_assert!(back.validate().pass);
        let x = ginibre(d_in, d_in, &mut g);
        prop_assert!(close(&back.apply(&x).unwrap(), &ch.apply(&x).unwrap(), 1e-10));
        prop_assert!(close(&back.choi(), &ch.choi(), 1e-10));
    }

    #[test]
    fn choi_traces_to_identity_on_input(seed in any::<u64>(), d_in in 2usize..=3, d_out in 2usize..=4) {
        let ch = channel(d_in, d_out, &mut rng(seed));
        let reduced = partial_trace(&ch.choi(), d_in, d_out, Subsystem::Second);
        prop_assert!(close(&reduced, &ComplexMatrix::identity(d_in, d_in), 1e-12));
    }

    #[test]
    fn stinespring_dilates_channel(seed in any::<u64>(), d_in in 2usize..=3, d_out in 2usize..=4) {
        let mut g = rng(seed);
        let ch = channel(d_in, d_out, &mut g);
        let iso = ch.stinespring();
        prop_assert!(iso.isometry_defect() < 1e-12);
        let x = ginibre(d_in, d_in, &mut g);
        let y = ginibre(d_out, d_out, &mut g);
        prop_assert!(close(&iso.apply(&x), &ch.apply(&x).unwrap(), 1e-12));
        prop_assert!(close(&iso.adjoint_apply(&y), &ch.adjoint_apply(&y).unwrap(), 1e-12));
    }

    #[test]
    fn adjoint_is_hilbert_schmidt_dual(seed in any::<u64>(), d_in in 2usize..=3, d_out in 2usize..=4) {
        let mut g = rng(seed);
        let ch = channel(d_in, d_out, &mut g);
        let x = ginibre(d_in, d_in, &mut g);
        let y = ginibre(d_out, d_out, &mut g);
        let lhs = trace(&(ch.apply(&x).unwrap() * &y));
        let rhs = trace(&(&x * ch.adjoint_apply(&y).unwrap()));
        prop_assert!((lhs - rhs).norm() <= 1e-11 * lhs.norm().max(1.0));
        prop_assert!(close(&ch.adjoint_apply(&ComplexMatrix::identity(d_out, d_out)).unwrap(), &ComplexMatrix::identity(d_in, d_in), 1e-12));
    }

    #[test]
    fn composition_applies_in_order(seed in any::<u64>(), d in 2usize..=3) {
        let mut g = rng(seed);
        let (first, second) = (channel(d, d + 1, &mut g), channel(d + 1, d, &mut g));
        let both = first.then(&second).unwrap();
        let x = ginibre(d, d, &mut g);
        prop_assert!(close(&both.apply(&x).unwrap(), &second.apply(&first.apply(&x).unwrap()).unwrap(), 1e-12));
    }

    #[test]
    fn relative_entropy_satisfies_data_processing(seed in any::<u64>(), d in 2usize..=4, d_out in 2usize..=4) {
        let mut g = rng(seed);
        let (rho, eta) = (mixed(d, &mut g), faithful(d, &mut g));
        let ch = channel(d, d_out, &mut g);
        let before = relative_entropy(&rho, &eta).unwrap().value;
        let after = relative_entropy(&ch.apply_state(&rho).unwrap(), &ch.apply_state(&eta).unwrap()).unwrap().value;
        prop_assert!(after <= before + 1e-10);
    }

    /// Divergences and fidelities are unchanged by an isometric embedding.
    #[test]
    fn isometric_embedding_invariance(seed in any::<u64>(), d in 2usize..=3, extra in 1usize..=2, p in 1.0f64..4.0) {
        let mut g = rng(seed);
        let (rho, eta) = (faithful(d, &mut g), faithful(d, &mut g));
        let v = haar_isometry(d + extra, d, &mut g);
        let (vr, ve) = (conjugate(&v, &rho), conjugate(&v, &eta));
        let pairs = [
            (relative_entropy(&rho, &eta).unwrap().value, relative_entropy(&vr, &ve).unwrap().value),
            (
                alpha_z_renyi(&rho, &eta, 1.5, 1.5, RenyiDomain::Checked).unwrap().value,
                alpha_z_renyi(&vr, &ve, 1.5, 1.5, RenyiDomain::Checked).unwrap().value,
            ),
            (p_fidelity(rho.psd(), eta.psd(), p).unwrap(), p_fidelity(vr.psd(), ve.psd(), p).unwrap()),
            (
                p_fidelity_normalized(rho.psd(), eta.psd(), p).unwrap(),
                p_fidelity_normalized(vr.psd(), ve.psd(), p).unwrap(),
            ),
        ];
        for (a, b) in pairs {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    /// `f_p(UρU†, UσU†) = f_p(ρ, σ)`.
    #[test]
    fn p_fidelity_unitary_invariance(seed in any::<u64>(), d in 2usize..=4, p in 1.0f64..6.0) {
        let mut g = rng(seed);
        let (rho, eta) = (mixed(d, &mut g), mixed(d, &mut g));
        let u = haar_unitary(d, &mut g);
        let a = p_fidelity(rho.psd(), eta.psd(), p).unwrap();
        let b = p_fidelity(conjugate(&u, &rho).psd(), conjugate(&u, &eta).psd(), p).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
        prop_assert!(p_fidelity_normalized(rho.psd(), eta.psd(), p).unwrap() <= 1.0 + 1e-12);
    }

    /// Channels that are isometries are exactly recoverable: FR vanishes and the
    /// interpolant has unit norm on the whole strip.
    #[test]
    fn isometric_channel_is_exactly_recoverable(seed in any::<u64>(), d in 2usize..=3, t in -2.0f64..2.0, theta in 0.1f64..1.0) {
        let mut g = rng(seed);
        let (rho, eta) = (faithful(d, &mut g), faithful(d, &mut g));
        let v = haar_isometry(d + 1, d, &mut g);
        let ch = QuantumChannel::new(d, d + 1, vec![v]).unwrap();
        let z = c(theta, t);
        let fr = FidelityOfRecovery::new(&rho, &eta, &ch).unwrap();
        prop_assert!(fr.log_fidelity(z).unwrap().abs() < 1e-9);
        let ctx = InterpolantContext::new(&rho, &eta, &ch).unwrap();
        prop_assert!((ctx.norm(z, 1.0 / theta).unwrap() - 1.0).abs() < 1e-9);
        let rec = RecoveryContext::new(&eta, &ch).unwrap();
        let rho_hat = ch.apply(rho.matrix()).unwrap();
        prop_assert!(close(&rec.petz(&rho_hat).unwrap(), rho.matrix(), 1e-9));
    }

    /// The interpolant norm does not depend on the Stinespring isometry chosen:
    /// a unitary on the environment leaves it unchanged.
    #[test]
    fn interpolant_norm_independent_of_dilation(seed in any::<u64>(), d in 2usize..=3, t in -2.0f64..2.0, theta in 0.1f64..1.0) {
        let mut g = rng(seed);
        let (rho, eta) = (faithful(d, &mut g), faithful(d, &mut g));
        let ch = channel(d, d, &mut g);
        let iso = ch.stinespring();
        let w = haar_unitary(iso.d_env, &mut g);
        let rotated = StinespringIsometry {
            v: kron(&ComplexMatrix::identity(iso.d_out, iso.d_out), &w) * &iso.v,
            ..iso.clone()
        };
        let z = c(theta, t);
        let a = InterpolantContext::with_isometry(&rho, &eta, &ch, iso).unwrap().norm(z, 1.0 / theta).unwrap();
        let b = InterpolantContext::with_isometry(&rho, &eta, &ch, rotated).unwrap().norm(z, 1.0 / theta).unwrap();
        prop_assert!((a - b).abs() <= 1e-10);
    }

    /// Universal recovery sends `Φ(η)` back to `η` and is trace preserving.
    #[test]
    fn universal_recovery_fixed_point(seed in any::<u64>(), d in 2usize..=3) {
        let mut g = rng(seed);
        let (rho, eta) = (mixed(d, &mut g), faithful(d, &mut g));
        let ch = channel(d, d, &mut g);
        let ctx = RecoveryContext::new(&eta, &ch).unwrap();
        let rule = QuadratureRule::default();
        let back = ctx.universal(ctx.eta_hat().matrix(), &rule).unwrap().value;
        prop_assert!(close(&back, eta.matrix(), 1e-8));
        let rec = ctx.universal(&ch.apply(rho.matrix()).unwrap(), &rule).unwrap().value;
        prop_assert!((trace(&rec).re - 1.0).abs() < 1e-8);
        prop_assert!(PsdMatrix::from_hermitian_part(&rec).is_ok());
    }
}

#[test]
fn measured_entropy_invariant_under_embedding() {
    let mut g = rng(11);
    let (rho, eta) = (faithful(3, &mut g), faithful(3, &mut g));
    let embed = make_channel(&ChannelKind::BlockEmbedding { d_in: 3, d_out: 5 }).unwrap();
    let a = measured_relative_entropy(&rho, &eta, 1e-10).unwrap().value.value;
    let b = measured_relative_entropy(&embed.apply_state(&rho).unwrap(), &embed.apply_state(&eta).unwrap(), 1e-10)
        .unwrap()
        .value
        .value;
    assert!((a - b).abs() < 1e-7, "{a} vs {b}");
}
