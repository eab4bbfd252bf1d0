//! Shows the per-unit bases, branch admittances and a normalize/denormalize
//! round trip for the CEDER network.
//!
//!     cargo run --example per_unit

use acdc_opf::grid_model::{denormalize, line_impedance, per_unit_normalize, transformer_impedance};
use acdc_opf::io::{fixture_path, read_network};

fn main() -> acdc_opf::Result<()> {
    let network = read_network(fixture_path("ceder.json"))?;
    let pu = per_unit_normalize(&network, network.s_base())?;
    let bases = pu.per_unit().expect("normalized");

    println!("S_base = {} kVA", bases.s_base);
    println!("{:>4} {:>8} {:>10} {:>10}", "bus", "V (kV)", "Z (ohm)", "I (kA)");
    for bus in network.buses() {
        println!(
            "{:>4} {:>8.3} {:>10.4} {:>10.4}",
            bus.id,
            bases.v_base[bus.id],
            bases.z_base(bus.id)?,
            bases.i_base(bus.id)?
        );
    }

    for (i, line) in network.lines().iter().enumerate() {
        let z = line_impedance(line);
        let (c, s) = z.inverse()?;
        let norm = pu.line_admittance(i).expect("normalized lines carry admittances");
        println!(
            "line {} ({}->{}): r {:.4} ohm, x {:.4} ohm; c {:.4} S = {:.4} pu, s {:.4} S = {:.4} pu, b {:.3e} pu",
            line.id, line.from, line.to, z.r, z.x, c, norm.c, s, norm.s, norm.b_shunt
        );
    }
    for (i, t) in network.transformers().iter().enumerate() {
        let z = transformer_impedance(t)?;
        let norm = pu.transformer_admittance(i).expect("normalized transformers carry admittances");
        println!(
            "transformer {} ({}->{}): |z| {:.5} ohm, r {:.5} ohm, x {:.7} ohm; c {:.4} pu, s {:.4} pu",
            t.id,
            t.from,
            t.to,
            z.magnitude(),
            z.r,
            z.x,
            norm.c,
            norm.s
        );
    }

    let back = denormalize(&pu)?;
    println!("round trip identical: {}", back == network);
    Ok(())
}
