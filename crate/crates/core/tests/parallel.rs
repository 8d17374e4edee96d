//! The parallel and sequential maps must give bit-identical results.

use monodromy::hypergeom::LocalPoint;
use monodromy::linalg::re;
use monodromy::odecore::{companion, ScalarODE};
use monodromy::par;
use monodromy::transport::{frobenius_basis_at, loop_around, monodromy};

fn sweep_entry(c: &f64) -> Vec<(u64, u64)> {
    let sys = companion(&ScalarODE::hypergeometric(re(0.3), re(0.7), re(*c)));
    let x0 = re(0.5);
    let basis = frobenius_basis_at(re(0.3), re(0.7), re(*c), LocalPoint::Zero, x0).unwrap();
    let gamma = loop_around(re(0.0), 0.25, x0, &[re(1.0)]).unwrap();
    let m = monodromy(&sys, &basis, &gamma, 1e-10).unwrap();
    m.matrix.iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

#[test]
fn sweep_is_identical_sequentially_and_in_parallel() {
    let cs: Vec<f64> = (1..=12).map(|k| 0.05 + 0.07 * k as f64).collect();
    let seq = par::map_seq(&cs, sweep_entry);
    let par = par::map(&cs, sweep_entry);
    assert_eq!(seq, par);
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_backend_is_active() {
    assert!(par::is_parallel());
    let cs = [0.2, 0.4, 0.6];
    assert_eq!(par::map_par(&cs, sweep_entry), par::map_seq(&cs, sweep_entry));
}
