//! Evaluate the transformation and its residual density for a few δ.

use ptm::transform::{Extrapolation, TransformConfig};
use ptm::Result;

fn main() -> Result<()> {
    let cfg = TransformConfig::new(-4.0, 4.0, 15, Extrapolation::Transition { lambda: 0.8 })?;
    let shapes: [(&str, Vec<f64>); 3] = [
        ("identity", vec![0.0; 15]),
        ("right-skew", (0..15).map(|k| 0.08 * k as f64).collect()),
        (
            "bimodal",
            (0..15)
                .map(|k| if (5..10).contains(&k) { 1.2 } else { -0.4 })
                .collect(),
        ),
    ];
    println!("shape,r,h,dh,density");
    for (name, delta) in &shapes {
        let p = cfg.params(delta)?;
        for i in 0..=40 {
            let r = -5.0 + 0.25 * i as f64;
            println!(
                "{name},{r},{:.6},{:.6},{:.6}",
                p.forward(&cfg, r),
                p.deriv(&cfg, r),
                p.log_density(&cfg, r).exp()
            );
        }
        let z = 1.2;
        println!(
            "# {name}: h^-1({z}) = {:.6}, F(a) = {:.6}",
            p.inverse(&cfg, z)?,
            p.cdf(&cfg, -4.0)
        );
    }
    Ok(())
}
