//! Feature maps and cost checks: basis values and Jacobians, the
//! quadratic-weight/matrix convention, and cost validation warnings.
//!
//!     cargo run --example bases_and_costs

use nalgebra::{DMatrix, DVector};
use siql::basis::{basis_by_name, matrix_to_quadratic_weights, quadratic_weights_to_matrix};
use siql::cost::{validate_cost, CostSpec, SampleRegion};

fn main() -> siql::Result<()> {
    let x = DVector::from_vec(vec![0.3, -0.7]);
    for name in ["quadratic", "case1_actor", "case2_actor", "poly:3"] {
        let b = basis_by_name(name, 2)?;
        println!("{name} ({} features): {:?}", b.dim_out(), b.labels());
        println!("  phi(x)  = {:.4?}", b.eval(&x)?.as_slice());
        println!("  dphi/dx row 0 = {:.4?}", b.gradient(&x)?.row(0).iter().collect::<Vec<_>>());
    }

    let w = DVector::from_vec(vec![0.5, 0.2, 1.0]);
    let p = quadratic_weights_to_matrix(&w, 2)?;
    println!("w = {:?} <-> P = {:?} <-> {:?}", w.as_slice(), p.as_slice(), matrix_to_quadratic_weights(&p).as_slice());

    let region = SampleRegion::cube(2, 1.0);
    let ok = validate_cost(&CostSpec::benchmark(), &region)?;
    println!("benchmark cost: passed {} (min S/|x|^2 = {:.3})", ok.passed(), ok.min_state_ratio);
    let weak = CostSpec::custom("x1 only", |x| x[0] * x[0], DMatrix::identity(1, 1))?;
    println!("x1-only cost warnings: {:?}", validate_cost(&weak, &region)?.warnings);
    let bad_r = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    if let Err(e) = CostSpec::quadratic(DMatrix::identity(2, 2), bad_r) {
        println!("indefinite R rejected: {e}");
    }
    Ok(())
}
