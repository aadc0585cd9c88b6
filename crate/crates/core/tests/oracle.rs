//! Cross-checks against an independent dense linear algebra implementation.

use approx::assert_abs_diff_eq;
use nalgebra::{Complex, DMatrix, SymmetricEigen};

use chanent_core::channels::compose;
use chanent_core::divergence::{channel_divergence, divergence_to_depolarizing, DivergenceKind};
use chanent_core::properties::{phi_monotonicity_violation_for, stability_violation_a_for};
use chanent_core::random;
use chanent_core::resource::{measurement_in_basis, qubit_measurement_coherence_analytic};
use chanent_core::states::{
    conditional_entropy, hypothesis_divergence_zero, maximally_entangled, relative_entropy, von_neumann_entropy,
    Bits, DensityState,
};
use chanent_core::{CMatrix, KrausChannel, OptimizerConfig, PureState};

type M = DMatrix<Complex<f64>>;

const CUT: f64 = 1e-10;

fn to_na(m: &CMatrix) -> M {
    M::from_fn(m.rows(), m.cols(), |i, j| {
        let z = m[(i, j)];
        Complex::new(z.re, z.im)
    })
}

fn eig(m: &M) -> (Vec<f64>, M) {
    let h = (m + m.adjoint()) * Complex::new(0.5, 0.0);
    let e = SymmetricEigen::new(h);
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

fn entropy(m: &M) -> f64 {
    eig(m).0.iter().filter(|&&x| x > CUT).map(|&x| -x * x.log2()).sum()
}

fn log2m(m: &M) -> M {
    let (vals, vecs) = eig(m);
    let mut out = M::zeros(m.nrows(), m.ncols());
    for (k, &v) in vals.iter().enumerate() {
        if v > CUT {
            let c = vecs.column(k);
            out += (c * c.adjoint()) * Complex::new(v.log2(), 0.0);
        }
    }
    out
}

fn support(m: &M) -> M {
    let (vals, vecs) = eig(m);
    let top = vals.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let mut out = M::zeros(m.nrows(), m.ncols());
    for (k, &v) in vals.iter().enumerate() {
        if v > CUT * top.max(1.0) {
            let c = vecs.column(k);
            out += c * c.adjoint();
        }
    }
    out
}

fn umegaki(rho: &M, sigma: &M) -> f64 {
    -entropy(rho) - (rho * log2m(sigma)).trace().re
}

fn d_h(rho: &M, sigma: &M) -> f64 {
    -(support(rho) * sigma).trace().re.log2()
}

fn ket(i: usize, d: usize) -> M {
    let mut v = M::zeros(d, 1);
    v[(i, 0)] = Complex::new(1.0, 0.0);
    v
}

/// `(N (x) I)(Phi+)` built from `|i><j|` images, output factor first.
fn choi_oracle(ch: &KrausChannel) -> M {
    let (din, dout) = (ch.dim_in(), ch.dim_out());
    let mut j = M::zeros(dout * din, dout * din);
    for a in 0..din {
        for b in 0..din {
            let unit = &ket(a, din) * ket(b, din).adjoint();
            let mut image = M::zeros(dout, dout);
            for k in ch.kraus() {
                let k = to_na(k);
                image += &k * &unit * k.adjoint();
            }
            j += image.kronecker(&unit) / Complex::new(din as f64, 0.0);
        }
    }
    j
}

fn random_state(seed: u64, d: usize) -> DensityState {
    random::density_state(&mut random::rng(seed, 0), d)
}

fn pure_mixture(seed: u64, d: usize, rank: usize) -> DensityState {
    let mut rng = random::rng(seed, 1);
    let mut m = CMatrix::zeros(d, d);
    for _ in 0..rank {
        let psi = random::pure_state(&mut rng, d);
        m = &m + &CMatrix::outer(psi.amplitudes()).scale_real(1.0 / rank as f64);
    }
    DensityState::from_matrix(m).unwrap()
}

#[test]
fn eigenvalues_match() {
    for seed in 0..20 {
        let d = 2 + (seed as usize % 6);
        let g = random::gaussian_matrix(&mut random::rng(seed, 7), d, d);
        let h = &g + &g.adjoint();
        let ours = h.hermitian_eig().unwrap();
        let mut theirs = eig(&to_na(&h)).0;
        theirs.sort_by(f64::total_cmp);
        for (a, b) in ours.values.iter().zip(&theirs) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }
}

#[test]
fn entropies_match() {
    for seed in 0..20 {
        let d = 2 + (seed as usize % 4);
        let rho = random_state(seed, d);
        assert_abs_diff_eq!(von_neumann_entropy(&rho), entropy(&to_na(rho.matrix())), epsilon = 1e-10);
    }
}

#[test]
fn relative_entropy_and_hypothesis_divergence_match() {
    for seed in 0..20 {
        let d = 2 + (seed as usize % 3);
        let rho = pure_mixture(seed, d, 1 + seed as usize % d);
        let sigma = random_state(seed + 100, d);
        let (r, s) = (to_na(rho.matrix()), to_na(sigma.matrix()));
        assert_abs_diff_eq!(relative_entropy(&rho, &sigma).unwrap().to_f64(), umegaki(&r, &s), epsilon = 1e-8);
        assert_abs_diff_eq!(hypothesis_divergence_zero(&rho, &sigma).unwrap().to_f64(), d_h(&r, &s), epsilon = 1e-9);
    }
}

#[test]
fn escaped_support_is_infinite() {
    let rho = DensityState::basis(2, 0);
    let sigma = DensityState::basis(2, 1);
    assert_eq!(relative_entropy(&rho, &sigma).unwrap(), Bits::Infinite);
    assert_eq!(hypothesis_divergence_zero(&rho, &sigma).unwrap(), Bits::Infinite);
}

#[test]
fn conditional_entropy_matches() {
    for seed in 0..10 {
        let rho = random_state(seed, 4).with_dims(vec![2, 2]).unwrap();
        let full = to_na(rho.matrix());
        let b = to_na(rho.partial_trace(&[1]).unwrap().matrix());
        assert_abs_diff_eq!(conditional_entropy(&rho, &[0]).unwrap(), entropy(&full) - entropy(&b), epsilon = 1e-10);
    }
}

#[test]
fn choi_matrix_matches() {
    for seed in 0..10 {
        let (din, dout) = (2 + seed as usize % 2, 2 + (seed as usize / 2) % 2);
        let ch = random::channel(&mut random::rng(seed, 3), din, dout);
        let ours = to_na(&ch.choi_matrix());
        let theirs = choi_oracle(&ch);
        assert!((ours - theirs).norm() < 1e-12);
    }
}

#[test]
fn phi_kinds_against_depolarizing_match_the_choi_oracle() {
    for seed in 0..10 {
        let d = 2 + seed as usize % 2;
        let ch = random::channel(&mut random::rng(seed, 4), d, d);
        let j = choi_oracle(&ch);
        let rank = eig(&j).0.iter().filter(|&&x| x > CUT).count() as f64;
        let log = ((d * d) as f64).log2();
        let cfg = OptimizerConfig::default();
        let dphi = divergence_to_depolarizing(DivergenceKind::DPhi, &ch, &cfg).unwrap().value.to_f64();
        let sphi = divergence_to_depolarizing(DivergenceKind::SPhi, &ch, &cfg).unwrap().value.to_f64();
        assert_abs_diff_eq!(dphi, log - rank.log2(), epsilon = 1e-9);
        assert_abs_diff_eq!(sphi, log - entropy(&j), epsilon = 1e-9);

        let dep = KrausChannel::depolarizing(d, d);
        let direct = channel_divergence(DivergenceKind::SPhi, &ch, &dep, &cfg).unwrap().value.to_f64();
        assert_abs_diff_eq!(direct, umegaki(&j, &choi_oracle(&dep)), epsilon = 1e-8);
    }
}

#[test]
fn n0_phi_values() {
    let n0 = KrausChannel::decay_to_one(0.5).unwrap();
    let dep = KrausChannel::depolarizing(2, 2);
    let (j, k) = (choi_oracle(&n0), choi_oracle(&dep));
    assert_abs_diff_eq!(d_h(&j, &k), (4.0f64 / 3.0).log2(), epsilon = 1e-12);
    assert_abs_diff_eq!(umegaki(&j, &k), 0.5, epsilon = 1e-12);
}

#[test]
fn sandwich_witness_matches_oracle() {
    let n0 = KrausChannel::decay_to_one(0.5).unwrap();
    let flip = KrausChannel::replacement(2, &DensityState::basis(2, 1));
    let after = choi_oracle(&compose(&n0, &flip).unwrap());
    let mixed = choi_oracle(&KrausChannel::depolarizing(2, 2));
    let expected = (&ket(1, 2) * ket(1, 2).adjoint()).kronecker(&(M::identity(2, 2) * Complex::new(0.5, 0.0)));
    assert!((&after - &expected).norm() < 1e-12);
    for kind in [DivergenceKind::DPhi, DivergenceKind::SPhi] {
        let w = phi_monotonicity_violation_for(kind).unwrap().witness.unwrap();
        let want = if kind == DivergenceKind::DPhi { d_h(&after, &mixed) } else { umegaki(&after, &mixed) };
        assert_abs_diff_eq!(w.value.to_f64(), want, epsilon = 1e-9);
        assert_abs_diff_eq!(want, 1.0, epsilon = 1e-12);
    }
}

#[test]
fn stability_witness_matches_oracle() {
    let phi = to_na(maximally_entangled(2).to_density().matrix());
    let mixed = M::identity(4, 4) * Complex::new(0.25, 0.0);
    for kind in [DivergenceKind::DA, DivergenceKind::SA] {
        let w = stability_violation_a_for(kind).unwrap().witness.unwrap();
        let want = if kind == DivergenceKind::DA { d_h(&phi, &mixed) } else { umegaki(&phi, &mixed) };
        assert_abs_diff_eq!(w.value.to_f64(), want, epsilon = 1e-9);
        assert_abs_diff_eq!(want, 2.0, epsilon = 1e-12);
    }
}

/// `min` over classical channels `|i><i| -> sum_a p(a|i) |a><a|` (grid) of
/// `max_a S((N (x) I)(psi_a) || (C (x) I)(psi_a))` over the inputs
/// `cos a |psi0>|0> + sin a |psi1>|1>`. A lower bound of the measure over
/// classical channels, up to the grid in `p`.
fn classical_measurement_oracle(psi0: [f64; 2]) -> f64 {
    let c = |x: f64| Complex::new(x, 0.0);
    let basis = [
        DMatrix::from_column_slice(2, 1, &[c(psi0[0]), c(psi0[1])]),
        DMatrix::from_column_slice(2, 1, &[c(-psi0[1]), c(psi0[0])]),
    ];
    let proj = |v: &M| v * v.adjoint();
    let classical = |x: &M, p: [f64; 2]| {
        let mut out = M::zeros(2, 2);
        for (i, &q) in p.iter().enumerate() {
            out[(0, 0)] += x[(i, i)] * c(q);
            out[(1, 1)] += x[(i, i)] * c(1.0 - q);
        }
        out
    };
    let (grid, angles) = (100, 32);
    let mut best = f64::INFINITY;
    for i in 0..=grid {
        for j in 0..=grid {
            let p = [i as f64 / grid as f64, j as f64 / grid as f64];
            let mut worst = 0.0f64;
            for t in 0..=angles {
                let a = std::f64::consts::FRAC_PI_2 * t as f64 / angles as f64;
                let amp = [a.cos(), a.sin()];
                let mut rho = M::zeros(4, 4);
                let mut sigma = M::zeros(4, 4);
                for k in 0..2 {
                    rho += proj(&basis[k]).kronecker(&proj(&ket(k, 2))) * c(amp[k] * amp[k]);
                    for l in 0..2 {
                        let x = &basis[k] * basis[l].adjoint();
                        let unit = &ket(k, 2) * ket(l, 2).adjoint();
                        sigma += classical(&x, p).kronecker(&unit) * c(amp[k] * amp[l]);
                    }
                }
                let sup = support(&sigma);
                let v = if (&rho - &sup * &rho * &sup).norm() > 1e-9 { f64::INFINITY } else { umegaki(&rho, &sigma) };
                worst = worst.max(v);
            }
            best = best.min(worst);
        }
    }
    best
}

#[test]
fn measurement_coherence_reference_values() {
    let t = std::f64::consts::PI / 8.0;
    let psi = PureState::from_real(&[t.cos(), t.sin()]).unwrap();
    let a = qubit_measurement_coherence_analytic(&psi).unwrap();
    let c2 = t.cos().powi(2);
    assert_abs_diff_eq!(a.c_rel, -c2 * c2.log2() - (1.0 - c2) * (1.0 - c2).log2(), epsilon = 1e-12);
    assert_abs_diff_eq!(a.c_min, -c2.log2(), epsilon = 1e-12);

    // The measurement channel keeps its basis states and dephases the rest.
    let n = measurement_in_basis(&psi).unwrap();
    let out = n.apply(&psi.to_density()).unwrap();
    assert!((to_na(out.matrix()) - to_na(psi.to_density().matrix())).norm() < 1e-12);

    // Against classical measure-and-prepare channels the entangled inputs
    // force at least H(c^4 + s^4), which exceeds H(c^2) here.
    let classical = classical_measurement_oracle([t.cos(), t.sin()]);
    let s2 = 1.0 - c2;
    let q = c2 * c2 + s2 * s2;
    assert_abs_diff_eq!(classical, -q * q.log2() - (1.0 - q) * (1.0 - q).log2(), epsilon = 5e-3);
    assert!(classical > a.c_rel + 0.2);
}

#[test]
fn purification_marginal_matches() {
    let rho = random_state(5, 3);
    let psi = chanent_core::divergence::purify(rho.matrix());
    let full = CMatrix::outer(psi.amplitudes());
    let marginal = full.partial_trace(&[3, 3], &[0]).unwrap();
    assert!((to_na(&marginal) - to_na(rho.matrix())).norm() < 1e-10);
}
