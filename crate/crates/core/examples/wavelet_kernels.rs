//! Scaling functions and the projection kernels built from them.
use dppss::kernels::{IndexMode, ProjectionKernel};
use dppss::wavelets::ScalingFunction;

fn main() -> dppss::Result<()> {
    let db2 = ScalingFunction::daubechies2()?;
    println!(
        "db2 support {:?}, first moment {:.6}",
        db2.support(),
        db2.first_moment()
    );
    for x in [0.5, 1.0, 1.5, 2.0, 2.5] {
        println!("  phi({x}) = {:+.6}", db2.eval(x));
    }

    let kernels = [
        ProjectionKernel::wavelet(ScalingFunction::haar(), 3, 1, IndexMode::Interior)?,
        ProjectionKernel::wavelet(db2.clone(), 4, 1, IndexMode::Periodized)?,
        ProjectionKernel::wavelet(db2, 4, 1, IndexMode::Interior)?,
        ProjectionKernel::ope(2, 10)?,
    ];
    for k in &kernels {
        let x = vec![0.3; k.dim()];
        println!(
            "{:>10}  d={} rank={:>3}  K(x,x)={:8.3}  sup K(x,x)<={:8.3}",
            k.label(),
            k.dim(),
            k.rank(),
            k.diagonal(&x)?,
            k.diag_sup()
        );
    }
    Ok(())
}
