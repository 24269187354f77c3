//! Detuned-row lineshapes: a product of two displaced Lorentzians against
//! their sum.

use spinpump::fit::resonance::fit_resonance_product;
use spinpump::quantum::SystemParams;
use spinpump::scan::{sweep_g_factor, ScanGrid};
use spinpump::units::{uev_to_ghz, zeeman_splitting};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g_h = [0.30, 0.32, 0.36, 0.38, 0.40];
    let sweep = sweep_g_factor(&SystemParams::canonical(), 0.34, &g_h, 5.0, &ScanGrid::canonical())?;
    println!(" g_h   s [GHz]  RSS product  RSS sum");
    for (r, g) in g_h.iter().enumerate() {
        let s = uev_to_ghz(zeeman_splitting((g - 0.34).abs(), 5.0));
        let f = fit_resonance_product(&sweep.row_profile(r), s)?;
        println!("{g:.2}  {s:7.3}  {:11.3e}  {:.3e}", f.product.rss, f.sum.rss);
    }
    Ok(())
}
