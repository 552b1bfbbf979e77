//! Betti numbers of barycenter spaces: closed formula against the homology
//! oracle, and the two multiplicity bounds.

use liouville_torus::morse::{
    bar_betti_oracle, closed_betti, multiplicity_8pi16pi, multiplicity_general, SurfaceTopology,
};

fn main() -> liouville_torus::Result<()> {
    println!("{:<12} {:>2}  {:<28} {:>6}", "topology", "k", "d_q (q = 0, 1, ...)", "bound");
    for (bouquets, points) in [(vec![1], 0), (vec![2], 1), (vec![1, 3], 2), (vec![], 3)] {
        let topo = SurfaceTopology::new(bouquets.clone(), points)?;
        for k in 1..=4 {
            let closed = closed_betti(k, &topo)?;
            assert_eq!(closed, bar_betti_oracle(&topo, k)?);
            println!(
                "{:<12} {k:>2}  {:<28} {:>6}",
                format!("{bouquets:?}+{points}"),
                format!("{:?}", closed.as_slice()),
                multiplicity_general(k, &topo)?
            );
        }
    }
    let topo = SurfaceTopology::new(vec![2], 1)?;
    println!("(8 pi, 16 pi) bound, N = 1, M = 1, g = (2), |J| = 1: {}", multiplicity_8pi16pi(&topo, 1)?);
    Ok(())
}
